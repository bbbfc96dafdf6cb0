/**
 * Typed exceptions, one per stable platform error code, plus a transport
 * error for failures that never produced a response. Transport errors are
 * the only retriable kind; 4xx/5xx responses surface immediately.
 */

import type { ErrorBody } from "./types.js";

export class RuntimeApiError extends Error {
  readonly code: string;
  readonly status: number;
  readonly details: Record<string, unknown>;

  constructor(code: string, status: number, message: string, details: Record<string, unknown> = {}) {
    super(message);
    this.name = new.target.name;
    this.code = code;
    this.status = status;
    this.details = details;
  }
}

export class TransportError extends Error {
  constructor(message: string, readonly cause?: unknown) {
    super(message);
    this.name = "TransportError";
  }
}

export class TimeoutError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "TimeoutError";
  }
}

export class AuthFailedError extends RuntimeApiError {}
export class SchemaViolationError extends RuntimeApiError {}
export class InvalidJobError extends RuntimeApiError {}
export class UnknownBackendError extends RuntimeApiError {}
export class UnknownJobError extends RuntimeApiError {}
export class UnknownWorkerError extends RuntimeApiError {}
export class UnknownSessionError extends RuntimeApiError {}
export class CapabilityMissingError extends RuntimeApiError {}
export class UserLimitExceededError extends RuntimeApiError {}
export class ConflictError extends RuntimeApiError {}
export class NotReadyError extends RuntimeApiError {}
export class JobFailedError extends RuntimeApiError {}
export class JobCancelledError extends RuntimeApiError {}
export class NoCapableBackendError extends RuntimeApiError {}
export class IllegalTransitionError extends RuntimeApiError {}
export class InternalError extends RuntimeApiError {}

type ApiErrorClass = new (
  code: string,
  status: number,
  message: string,
  details?: Record<string, unknown>,
) => RuntimeApiError;

/** Stable error code -> exception class, exactly one class per code. */
export const ERROR_CLASSES: Record<string, ApiErrorClass> = {
  AUTH_FAILED: AuthFailedError,
  SCHEMA_VIOLATION: SchemaViolationError,
  INVALID_JOB: InvalidJobError,
  UNKNOWN_BACKEND: UnknownBackendError,
  UNKNOWN_JOB: UnknownJobError,
  UNKNOWN_WORKER: UnknownWorkerError,
  UNKNOWN_SESSION: UnknownSessionError,
  CAPABILITY_MISSING: CapabilityMissingError,
  USER_LIMIT_EXCEEDED: UserLimitExceededError,
  CONFLICT: ConflictError,
  NOT_READY: NotReadyError,
  JOB_FAILED: JobFailedError,
  JOB_CANCELLED: JobCancelledError,
  NO_CAPABLE_BACKEND: NoCapableBackendError,
  ILLEGAL_TRANSITION: IllegalTransitionError,
  INTERNAL: InternalError,
};

export function errorFromBody(status: number, body: Partial<ErrorBody> | null): RuntimeApiError {
  const code = body?.code ?? `HTTP_${status}`;
  const message = body?.message ?? `request failed with status ${status}`;
  const details = (body?.details ?? {}) as Record<string, unknown>;
  const cls = ERROR_CLASSES[code] ?? RuntimeApiError;
  return new cls(code, status, message, details);
}
