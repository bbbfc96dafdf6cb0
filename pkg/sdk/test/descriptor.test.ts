/**
 * Contract tests: every descriptor the SDK emits validates against the
 * platform's published golden schema. Runs without a live server.
 */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import Ajv2020 from "ajv/dist/2020.js";
import addFormats from "ajv-formats";
import { describe, expect, it } from "vitest";

import { buildJobDescriptor } from "../src/index.js";
import type { DescriptorSpec } from "../src/index.js";

const here = dirname(fileURLToPath(import.meta.url));
const SCHEMA_DIR = join(here, "..", "..", "src", "qruntime", "api", "schemas");

const ajv = new Ajv2020({ strict: false });
addFormats(ajv);
const validateDescriptor = ajv.compile(
  JSON.parse(readFileSync(join(SCHEMA_DIR, "job_descriptor.schema.json"), "utf-8")),
);

const BELL =
  "qreg q[2]; creg c[2]; h q[0]; cx q[0],q[1]; measure q[0] -> c[0]; measure q[1] -> c[1];";

function expectValid(descriptor: unknown) {
  const ok = validateDescriptor(descriptor);
  expect(validateDescriptor.errors ?? []).toEqual([]);
  expect(ok).toBe(true);
}

describe("buildJobDescriptor against the golden schema", () => {
  it("emits a minimal single job", () => {
    const descriptor = buildJobDescriptor({ backendName: "sim-linear-5", circuitText: BELL });
    expectValid(descriptor);
    expect(descriptor.kind).toBe("single");
    expect(descriptor.items).toHaveLength(1);
    expect(descriptor.items[0].circuit_text).toBe(BELL);
  });

  it("emits execution options, observable, seed", () => {
    const descriptor = buildJobDescriptor({
      backendName: "sim-linear-5",
      circuitText: BELL,
      shots: 2048,
      seed: 42,
      observable: { kind: "z_parity", bits: [0, 1] },
      executionOptions: [
        "ReadoutMitigation",
        { name: "ZeroNoiseExtrapolation", config: { scales: [1, 3, 5] } },
      ],
    });
    expectValid(descriptor);
    expect(descriptor.items[0].execution_options).toEqual([
      { name: "ReadoutMitigation", config: {} },
      { name: "ZeroNoiseExtrapolation", config: { scales: [1, 3, 5] } },
    ]);
  });

  it("emits a batch job from explicit items", () => {
    const descriptor = buildJobDescriptor({
      backendName: "sim-ring-7",
      items: [
        { circuitText: BELL, shots: 100 },
        { circuitText: "qreg q[1]; creg c[1]; x q[0]; measure q[0] -> c[0];", shots: 200 },
      ],
      priority: 3,
      maxRetries: 1,
      idempotencyKey: "batch-1",
    });
    expectValid(descriptor);
    expect(descriptor.kind).toBe("batch");
  });

  it("emits a hybrid job with the spsa section", () => {
    const descriptor = buildJobDescriptor({
      backendName: "auto",
      circuitText: "input float theta; qreg q[1]; creg c[1]; ry(theta) q[0]; measure q[0] -> c[0];",
      shots: 512,
      hybrid: { initialParams: { theta: 0.3 }, iterations: 50, a: 1.0, c: 0.2, seed: 9 },
    });
    expectValid(descriptor);
    expect(descriptor.kind).toBe("hybrid");
    expect(descriptor.hybrid).toEqual({
      initial_params: { theta: 0.3 },
      iterations: 50,
      spsa: { a: 1.0, c: 0.2 },
      seed: 9,
    });
  });

  it("stamps session ids", () => {
    const descriptor = buildJobDescriptor({
      backendName: "sim-linear-5",
      circuitText: BELL,
      sessionId: "ses-0001",
    });
    expectValid(descriptor);
    expect(descriptor.session_id).toBe("ses-0001");
  });

  it("fuzzed builder inputs always validate", () => {
    // deterministic xorshift so failures reproduce
    let state = 0x2545f491;
    const rand = () => {
      state ^= state << 13;
      state ^= state >>> 17;
      state ^= state << 5;
      state >>>= 0;
      return state / 0xffffffff;
    };
    for (let trial = 0; trial < 200; trial++) {
      const nItems = 1 + Math.floor(rand() * 3);
      const spec: DescriptorSpec = {
        backendName: rand() < 0.2 ? "auto" : "sim-linear-5",
        items: Array.from({ length: nItems }, () => ({
          circuitText: BELL,
          shots: 1 + Math.floor(rand() * 4096),
          executionOptions: rand() < 0.5 ? ["ZeroNoiseExtrapolation"] : [],
          seed: rand() < 0.5 ? Math.floor(rand() * 1e6) : undefined,
        })),
        priority: Math.floor(rand() * 10) - 5,
        maxRetries: Math.floor(rand() * 4),
      };
      if (rand() < 0.3) spec.idempotencyKey = `key-${trial}`;
      expectValid(buildJobDescriptor(spec));
    }
  });

  it("rejects contradictory input instead of emitting garbage", () => {
    expect(() => buildJobDescriptor({ backendName: "x" } as DescriptorSpec)).toThrow();
    expect(() =>
      buildJobDescriptor({ backendName: "x", circuitText: "a", items: [] } as DescriptorSpec),
    ).toThrow();
  });
});
