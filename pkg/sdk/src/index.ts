export { JobHandle, RuntimeClient, SessionScope } from "./client.js";
export { buildJobDescriptor } from "./descriptor.js";
export type { DescriptorSpec, HybridSpec, ItemSpec } from "./descriptor.js";
export {
  AuthFailedError,
  CapabilityMissingError,
  ConflictError,
  ERROR_CLASSES,
  errorFromBody,
  IllegalTransitionError,
  InternalError,
  InvalidJobError,
  JobCancelledError,
  JobFailedError,
  NoCapableBackendError,
  NotReadyError,
  RuntimeApiError,
  SchemaViolationError,
  TimeoutError,
  TransportError,
  UnknownBackendError,
  UnknownJobError,
  UnknownSessionError,
  UnknownWorkerError,
  UserLimitExceededError,
} from "./errors.js";
export type {
  BackendInfo,
  CalibrationSnapshot,
  ClientOptions,
  ErrorBody,
  HybridResult,
  HybridSection,
  ItemResult,
  JobDescriptor,
  JobItem,
  JobKind,
  JobProgress,
  JobResults,
  JobState,
  JobStatus,
  Observable,
  RetryPolicy,
  SessionInfo,
  SpsaGains,
  StageSpec,
  WaitOptions,
  WorkerAck,
  WorkerRegistration,
} from "./types.js";
