/**
 * Descriptor builder: camelCase convenience in, exact wire schema out.
 * Everything the builder emits validates against the platform's published
 * job_descriptor schema (pinned by the contract tests).
 */

import type {
  HybridSection,
  JobDescriptor,
  JobItem,
  JobKind,
  Observable,
  StageSpec,
} from "./types.js";

export interface ItemSpec {
  circuitText: string;
  executionOptions?: (string | StageSpec)[];
  shots?: number;
  observable?: Observable;
  seed?: number;
}

export interface HybridSpec {
  initialParams: Record<string, number>;
  iterations: number;
  a: number;
  c: number;
  seed?: number;
}

export interface DescriptorSpec {
  backendName: string;
  kind?: JobKind;
  /** Single-item shorthand; mutually exclusive with items. */
  circuitText?: string;
  executionOptions?: (string | StageSpec)[];
  shots?: number;
  observable?: Observable;
  seed?: number;
  items?: ItemSpec[];
  priority?: number;
  sessionId?: string;
  maxRetries?: number;
  hybrid?: HybridSpec;
  idempotencyKey?: string;
}

function stage(entry: string | StageSpec): StageSpec {
  if (typeof entry === "string") {
    return { name: entry, config: {} };
  }
  return { name: entry.name, config: entry.config ?? {} };
}

function item(spec: ItemSpec): JobItem {
  const out: JobItem = {
    circuit_text: spec.circuitText,
    execution_options: (spec.executionOptions ?? []).map(stage),
    shots: spec.shots ?? 1024,
  };
  if (spec.observable !== undefined) out.observable = spec.observable;
  if (spec.seed !== undefined) out.seed = spec.seed;
  return out;
}

export function buildJobDescriptor(spec: DescriptorSpec): JobDescriptor {
  if (!spec.backendName) {
    throw new Error("backendName is required");
  }
  if (spec.circuitText !== undefined && spec.items !== undefined) {
    throw new Error("give either circuitText or items, not both");
  }
  let items: JobItem[];
  if (spec.items !== undefined) {
    items = spec.items.map(item);
  } else if (spec.circuitText !== undefined) {
    items = [
      item({
        circuitText: spec.circuitText,
        executionOptions: spec.executionOptions,
        shots: spec.shots,
        observable: spec.observable,
        seed: spec.seed,
      }),
    ];
  } else {
    throw new Error("a job needs circuitText or items");
  }
  if (items.length === 0) {
    throw new Error("a job needs at least one item");
  }

  const kind: JobKind = spec.kind ?? (spec.hybrid ? "hybrid" : items.length > 1 ? "batch" : "single");
  const descriptor: JobDescriptor = {
    kind,
    backend_name: spec.backendName,
    items,
    priority: spec.priority ?? 0,
    max_retries: spec.maxRetries ?? 3,
  };
  if (spec.sessionId !== undefined) descriptor.session_id = spec.sessionId;
  if (spec.idempotencyKey !== undefined) descriptor.idempotency_key = spec.idempotencyKey;
  if (spec.hybrid !== undefined) {
    const hybrid: HybridSection = {
      initial_params: { ...spec.hybrid.initialParams },
      iterations: spec.hybrid.iterations,
      spsa: { a: spec.hybrid.a, c: spec.hybrid.c },
    };
    if (spec.hybrid.seed !== undefined) hybrid.seed = spec.hybrid.seed;
    descriptor.hybrid = hybrid;
  }
  return descriptor;
}
