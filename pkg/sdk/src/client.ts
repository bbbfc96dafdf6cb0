/**
 * Thin blocking-style client over the platform's REST API.
 *
 * Transport failures (connection refused, timeouts) are retried with
 * exponential backoff; any HTTP response, including 5xx, is surfaced
 * immediately as its typed error. Safe for concurrent use with independent
 * client instances.
 */

import { errorFromBody, JobCancelledError, JobFailedError, TimeoutError, TransportError } from "./errors.js";
import type {
  BackendInfo,
  CalibrationSnapshot,
  ClientOptions,
  ErrorBody,
  JobDescriptor,
  JobResults,
  JobStatus,
  RetryPolicy,
  SessionInfo,
  WaitOptions,
  WorkerAck,
  WorkerRegistration,
} from "./types.js";

const DEFAULT_ENDPOINT = "http://127.0.0.1:8411";
const DEFAULT_TOKEN = "dev-token";
const DEFAULT_RETRY: RetryPolicy = { maxRetries: 3, baseDelayMs: 100, maxDelayMs: 2000 };

const TERMINAL: ReadonlySet<string> = new Set(["COMPLETED", "FAILED", "CANCELLED"]);

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

function backoffMs(policy: RetryPolicy, attempt: number): number {
  return Math.min(policy.baseDelayMs * 2 ** attempt, policy.maxDelayMs);
}

export class JobHandle {
  constructor(
    private readonly client: RuntimeClient,
    readonly jobId: string,
  ) {}

  status(): Promise<JobStatus> {
    return this.client.jobStatus(this.jobId);
  }

  results(): Promise<JobResults> {
    return this.client.jobResults(this.jobId);
  }

  cancel(): Promise<void> {
    return this.client.cancelJob(this.jobId);
  }

  /**
   * Poll until the job reaches a terminal state and return its results.
   * FAILED raises JobFailedError (carrying the job's error), CANCELLED
   * raises JobCancelledError.
   */
  async wait(options: WaitOptions = {}): Promise<JobResults> {
    const timeoutMs = options.timeoutMs ?? 300_000;
    const pollMs = options.pollMs ?? 250;
    const deadline = Date.now() + timeoutMs;
    for (;;) {
      const status = await this.status();
      if (TERMINAL.has(status.status)) {
        if (status.status === "COMPLETED") {
          return this.results();
        }
        if (status.status === "FAILED") {
          throw new JobFailedError(
            "JOB_FAILED",
            409,
            status.error?.message ?? `job ${this.jobId} failed`,
            (status.error ?? {}) as Record<string, unknown>,
          );
        }
        throw new JobCancelledError("JOB_CANCELLED", 409, `job ${this.jobId} was cancelled`);
      }
      if (Date.now() >= deadline) {
        throw new TimeoutError(`job ${this.jobId} still ${status.status} after ${timeoutMs} ms`);
      }
      await sleep(pollMs);
    }
  }
}

export class SessionScope {
  constructor(
    private readonly client: RuntimeClient,
    readonly info: SessionInfo,
  ) {}

  get sessionId(): string {
    return this.info.session_id;
  }

  /** Submit a descriptor inside this session (session_id is stamped in). */
  submit(descriptor: JobDescriptor): Promise<JobHandle> {
    return this.client.submit({ ...descriptor, session_id: this.info.session_id });
  }

  close(): Promise<SessionInfo> {
    return this.client.closeSession(this.info.session_id);
  }
}

export class RuntimeClient {
  private readonly endpoint: string;
  private readonly token: string;
  private readonly timeoutMs: number;
  private readonly retry: RetryPolicy;

  constructor(options: ClientOptions = {}) {
    this.endpoint = (options.endpoint ?? process.env.QRUNTIME_ENDPOINT ?? DEFAULT_ENDPOINT).replace(/\/+$/, "");
    this.token = options.token ?? process.env.QRUNTIME_TOKEN ?? DEFAULT_TOKEN;
    this.timeoutMs = options.timeoutMs ?? 30_000;
    this.retry = { ...DEFAULT_RETRY, ...(options.retry ?? {}) };
  }

  // ------------------------------------------------------------------ jobs

  async submit(descriptor: JobDescriptor): Promise<JobHandle> {
    const body = await this.request<{ job_id: string }>("POST", "/v1/jobs", descriptor);
    return new JobHandle(this, body.job_id);
  }

  jobStatus(jobId: string): Promise<JobStatus> {
    return this.request<JobStatus>("GET", `/v1/jobs/${encodeURIComponent(jobId)}`);
  }

  jobResults(jobId: string): Promise<JobResults> {
    return this.request<JobResults>("GET", `/v1/jobs/${encodeURIComponent(jobId)}/results`);
  }

  async cancelJob(jobId: string): Promise<void> {
    await this.request("DELETE", `/v1/jobs/${encodeURIComponent(jobId)}`);
  }

  // -------------------------------------------------------------- sessions

  async openSession(backendId: string, ttlSeconds?: number): Promise<SessionScope> {
    const body: Record<string, unknown> = { backend_id: backendId };
    if (ttlSeconds !== undefined) body.ttl_seconds = ttlSeconds;
    const info = await this.request<SessionInfo>("POST", "/v1/sessions", body);
    return new SessionScope(this, info);
  }

  closeSession(sessionId: string): Promise<SessionInfo> {
    return this.request<SessionInfo>("DELETE", `/v1/sessions/${encodeURIComponent(sessionId)}`);
  }

  /** Context-manager analog: opens a session, runs the body, always closes. */
  async withSession<T>(backendId: string, body: (session: SessionScope) => Promise<T>): Promise<T> {
    const session = await this.openSession(backendId);
    try {
      return await body(session);
    } finally {
      try {
        await session.close();
      } catch {
        // closing best-effort; the server idles sessions out anyway
      }
    }
  }

  // ------------------------------------------------------------- discovery

  async backends(): Promise<BackendInfo[]> {
    const body = await this.request<{ backends: BackendInfo[] }>("GET", "/v1/backends");
    return body.backends;
  }

  calibration(backendId: string, refresh = false): Promise<CalibrationSnapshot> {
    const suffix = refresh ? "?refresh=true" : "";
    return this.request<CalibrationSnapshot>(
      "GET",
      `/v1/backends/${encodeURIComponent(backendId)}/calibration${suffix}`,
    );
  }

  registerWorker(registration: WorkerRegistration): Promise<WorkerAck> {
    return this.request<WorkerAck>("POST", "/v1/workers/register", registration);
  }

  heartbeat(workerId: string): Promise<WorkerAck> {
    return this.request<WorkerAck>("PUT", `/v1/workers/${encodeURIComponent(workerId)}/heartbeat`);
  }

  health(): Promise<{ status: string; version: string }> {
    return this.request("GET", "/health");
  }

  // ------------------------------------------------------------- transport

  /**
   * Low-level escape hatch; also the single choke point for retry and error
   * mapping. Retries transport failures only - a response of any status is
   * final (4xx/5xx raise their typed error).
   */
  async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const url = `${this.endpoint}${path}`;
    let lastFailure: unknown = null;
    for (let attempt = 0; attempt <= this.retry.maxRetries; attempt++) {
      const controller = new AbortController();
      const timer = setTimeout(() => controller.abort(), this.timeoutMs);
      let response: Response;
      try {
        response = await fetch(url, {
          method,
          headers: {
            "content-type": "application/json",
            authorization: `Bearer ${this.token}`,
          },
          body: body === undefined ? undefined : JSON.stringify(body),
          signal: controller.signal,
        });
      } catch (failure) {
        clearTimeout(timer);
        lastFailure = failure;
        if (attempt < this.retry.maxRetries) {
          await sleep(backoffMs(this.retry, attempt));
          continue;
        }
        break;
      }
      clearTimeout(timer);
      const text = await response.text();
      let parsed: unknown = null;
      if (text.length > 0) {
        try {
          parsed = JSON.parse(text);
        } catch {
          parsed = null;
        }
      }
      if (response.ok) {
        return parsed as T;
      }
      throw errorFromBody(response.status, parsed as Partial<ErrorBody> | null);
    }
    throw new TransportError(
      `${method} ${path} failed after ${this.retry.maxRetries + 1} attempt(s): ${String(lastFailure)}`,
      lastFailure,
    );
  }
}
