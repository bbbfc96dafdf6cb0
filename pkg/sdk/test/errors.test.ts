import { describe, expect, it } from "vitest";

import {
  AuthFailedError,
  CapabilityMissingError,
  ConflictError,
  ERROR_CLASSES,
  errorFromBody,
  NotReadyError,
  RuntimeApiError,
  UnknownJobError,
  UserLimitExceededError,
} from "../src/index.js";

describe("error code mapping", () => {
  it("maps every stable code to its own class, one to one", () => {
    const classes = Object.values(ERROR_CLASSES);
    expect(new Set(classes).size).toBe(classes.length);
    for (const [code, cls] of Object.entries(ERROR_CLASSES)) {
      const err = errorFromBody(418, { code, message: "m", details: {} });
      expect(err).toBeInstanceOf(cls);
      expect(err).toBeInstanceOf(RuntimeApiError);
      expect(err.code).toBe(code);
      // no other registered class matches (subclassing stays flat)
      for (const other of classes) {
        if (other !== cls) expect(err instanceof other).toBe(false);
      }
    }
  });

  it("covers the platform's published codes", () => {
    const published = [
      "AUTH_FAILED",
      "SCHEMA_VIOLATION",
      "INVALID_JOB",
      "UNKNOWN_BACKEND",
      "UNKNOWN_JOB",
      "UNKNOWN_WORKER",
      "UNKNOWN_SESSION",
      "CAPABILITY_MISSING",
      "USER_LIMIT_EXCEEDED",
      "CONFLICT",
      "NOT_READY",
      "JOB_FAILED",
      "JOB_CANCELLED",
      "NO_CAPABLE_BACKEND",
      "ILLEGAL_TRANSITION",
      "INTERNAL",
    ];
    expect(Object.keys(ERROR_CLASSES).sort()).toEqual(published.sort());
  });

  it("carries status, message and details", () => {
    const err = errorFromBody(409, {
      code: "CONFLICT",
      message: "overlaps reservation 'res-0001'",
      details: { reservation_id: "res-0001" },
    });
    expect(err).toBeInstanceOf(ConflictError);
    expect(err.status).toBe(409);
    expect(err.message).toContain("res-0001");
    expect(err.details.reservation_id).toBe("res-0001");
  });

  it("falls back to the base class for unknown codes", () => {
    const err = errorFromBody(502, { code: "SOMETHING_NEW", message: "m", details: {} });
    expect(err).toBeInstanceOf(RuntimeApiError);
    expect(err.code).toBe("SOMETHING_NEW");
    expect(Object.values(ERROR_CLASSES).some((cls) => err instanceof cls && cls !== RuntimeApiError)).toBe(false);
  });

  it("handles bodyless failures", () => {
    const err = errorFromBody(500, null);
    expect(err.code).toBe("HTTP_500");
    expect(err.status).toBe(500);
  });

  it("spot checks common classes", () => {
    expect(errorFromBody(401, { code: "AUTH_FAILED", message: "", details: {} })).toBeInstanceOf(AuthFailedError);
    expect(errorFromBody(404, { code: "UNKNOWN_JOB", message: "", details: {} })).toBeInstanceOf(UnknownJobError);
    expect(errorFromBody(409, { code: "CAPABILITY_MISSING", message: "", details: {} })).toBeInstanceOf(
      CapabilityMissingError,
    );
    expect(errorFromBody(429, { code: "USER_LIMIT_EXCEEDED", message: "", details: {} })).toBeInstanceOf(
      UserLimitExceededError,
    );
    expect(errorFromBody(409, { code: "NOT_READY", message: "", details: {} })).toBeInstanceOf(NotReadyError);
  });
});
