/**
 * Wire types, field-for-field the JSON bodies the platform accepts and
 * returns. The SDK is a pure wire client: it never compiles or simulates
 * anything locally.
 */

export type JobKind = "single" | "batch" | "hybrid";

export type JobState =
  | "QUEUED"
  | "SCHEDULED"
  | "RUNNING"
  | "COMPLETED"
  | "FAILED"
  | "CANCELLED";

export interface StageSpec {
  name: string;
  config?: Record<string, unknown>;
}

export interface Observable {
  kind?: "z_parity";
  bits?: number[] | null;
}

export interface JobItem {
  circuit_text: string;
  execution_options?: StageSpec[];
  shots?: number;
  observable?: Observable | null;
  seed?: number | null;
}

export interface SpsaGains {
  a: number;
  c: number;
}

export interface HybridSection {
  initial_params: Record<string, number>;
  iterations: number;
  spsa: SpsaGains;
  seed?: number | null;
}

export interface JobDescriptor {
  kind?: JobKind;
  backend_name: string;
  items: JobItem[];
  priority?: number;
  session_id?: string | null;
  max_retries?: number;
  hybrid?: HybridSection | null;
  idempotency_key?: string | null;
}

export interface JobProgress {
  completed: number;
  total: number;
}

export interface JobStatus {
  job_id: string;
  status: JobState;
  kind: JobKind;
  backend_id: string;
  submitted_at: string;
  started_at: string | null;
  finished_at: string | null;
  attempts: number;
  eta_seconds: number;
  progress: JobProgress | null;
  error: { code?: string; message?: string } | null;
  session_id: string | null;
}

export interface ExpectationResult {
  value: number;
  variance: number;
  metadata?: Record<string, unknown>;
}

export interface ItemResult {
  counts: Record<string, number> | null;
  expectation: ExpectationResult;
  estimated_duration_ns?: number;
  estimated_fidelity?: number;
  calibration_ts?: number;
}

export interface HybridResult {
  best_params: Record<string, number>;
  best_value: number;
  final_params: Record<string, number>;
  trace?: number[][];
  iterations: number;
  compilations?: number;
  bindings?: number;
  recompile_events?: number;
}

export interface JobResults {
  job_id: string;
  kind: JobKind;
  items: ItemResult[] | null;
  hybrid: HybridResult | null;
}

export interface BackendInfo {
  backend_id: string;
  num_qubits: number;
  basis_gates: string[];
  coupling: [number, number][];
  max_shots: number;
  queue_depth: number;
  gate_durations_ns?: Record<string, number>;
  readout_duration_ns?: number;
  timing_granularity_ns?: number;
}

export interface QubitCalibration {
  t1_us: number;
  t2_us: number;
  frequency_ghz: number;
  readout_error: number;
}

export interface GateCalibration {
  gate: string;
  qubits: number[];
  error_rate: number;
  duration_ns: number;
}

export interface CalibrationSnapshot {
  backend_id: string;
  timestamp: string;
  qubits: QubitCalibration[];
  gates: GateCalibration[];
}

export interface SessionInfo {
  session_id: string;
  user: string;
  backend_id: string;
  ttl_seconds: number;
  open: boolean;
}

export interface WorkerRegistration {
  worker_id: string;
  stages?: string[];
  backends?: string[];
  max_parallel?: number;
}

export interface WorkerAck {
  worker_id: string;
  acknowledged?: boolean;
  ttl_seconds: number;
}

export interface ErrorBody {
  code: string;
  message: string;
  details: Record<string, unknown>;
}

export interface RetryPolicy {
  maxRetries: number;
  baseDelayMs: number;
  maxDelayMs: number;
}

export interface ClientOptions {
  endpoint?: string;
  token?: string;
  timeoutMs?: number;
  retry?: Partial<RetryPolicy>;
}

export interface WaitOptions {
  timeoutMs?: number;
  pollMs?: number;
}
