import { describe, expect, it } from "vitest";

import humanRequestFixture from "../src/generated/human_request.fixture.json";
import {
  ShapeError,
  buildHumanTask,
  buildRelayRequest,
  checkEnvelopeShape,
  checkTaskShape,
} from "../src/rpc";
import type { HumanTaskParams } from "../src/types";

const messages = [{ role: "user", content: { type: "text", text: "hello" } as const }];

describe("task params schema", () => {
  it("accepts the reference human request params", () => {
    expect(() => checkTaskShape(humanRequestFixture.params)).not.toThrow();
    expect(() => checkEnvelopeShape(humanRequestFixture)).not.toThrow();
  });

  it("accepts what buildHumanTask produces", () => {
    const task = buildHumanTask("example/math_agent", messages, 200);
    expect(() => checkTaskShape(task)).not.toThrow();
    expect(task.sender.id).toBe("human_user");
    expect(task.recipient).toEqual({ id: "example/math_agent", role: "assistant" });
  });

  it("rejects a non-positive token budget", () => {
    const task = buildHumanTask("a", messages, 0);
    expect(() => checkTaskShape(task)).toThrow(ShapeError);
  });

  it("rejects an empty message list", () => {
    const task = buildHumanTask("a", [], 100);
    expect(() => checkTaskShape(task)).toThrow(/messages/);
  });

  it("rejects fields the server does not know", () => {
    const task = buildHumanTask("a", messages, 100) as HumanTaskParams & { extra?: string };
    task.extra = "nope";
    expect(() => checkTaskShape(task)).toThrow(ShapeError);
  });

  it("rejects non-text content", () => {
    const bad = {
      ...buildHumanTask("a", messages, 100),
      messages: [{ role: "user", content: { type: "image", text: "x" } }],
    };
    expect(() => checkTaskShape(bad)).toThrow(ShapeError);
  });
});

describe("request envelope schema", () => {
  it("accepts what buildRelayRequest produces", () => {
    const request = buildRelayRequest("node-0", buildHumanTask("example/echo_agent", messages, 64));
    expect(() => checkEnvelopeShape(request)).not.toThrow();
    expect(request.method).toBe("aios/relayTask");
    expect(request.params).toMatchObject({ node_id: "node-0" });
    expect(typeof request.id).toBe("string");
    expect(request.id.length).toBeGreaterThan(0);
  });

  it("gives every request a fresh id", () => {
    const a = buildRelayRequest("n", buildHumanTask("x", messages, 10));
    const b = buildRelayRequest("n", buildHumanTask("x", messages, 10));
    expect(a.id).not.toBe(b.id);
  });

  it("rejects numeric ids", () => {
    expect(() =>
      checkEnvelopeShape({ jsonrpc: "2.0", id: 7, method: "aios/listNodes", params: {} }),
    ).toThrow(ShapeError);
  });

  it("rejects a missing method", () => {
    expect(() => checkEnvelopeShape({ jsonrpc: "2.0", id: "1", params: {} })).toThrow(/method/);
  });

  it("rejects the wrong protocol tag", () => {
    expect(() =>
      checkEnvelopeShape({ jsonrpc: "1.0", id: "1", method: "m", params: {} }),
    ).toThrow(ShapeError);
  });

  it("refuses to build a relay request around invalid params", () => {
    expect(() => buildRelayRequest("node-0", buildHumanTask("", messages, 64))).toThrow(
      ShapeError,
    );
  });
});
