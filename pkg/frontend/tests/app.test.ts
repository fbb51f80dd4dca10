import { afterEach, describe, expect, it, vi } from "vitest";

import listNodesFixture from "../src/generated/list_nodes.fixture.json";
import { App } from "../src/app";
import { RpcClient } from "../src/rpc";
import type { RegistrySnapshot } from "../src/types";

type RpcDoc = { jsonrpc: string; id: string; method: string; params: Record<string, unknown> };

function snapshot(): RegistrySnapshot {
  return structuredClone(listNodesFixture) as unknown as RegistrySnapshot;
}

/** Fake the registry: handler maps a request doc to a result, error, or throw. */
function stubRegistry(handler: (doc: RpcDoc) => unknown) {
  const seen: RpcDoc[] = [];
  const fn = vi.fn(async (_url: unknown, init?: RequestInit) => {
    const doc = JSON.parse(String(init?.body)) as RpcDoc;
    seen.push(doc);
    const out = handler(doc);
    if (out instanceof Error) throw out;
    return new Response(JSON.stringify({ jsonrpc: "2.0", id: doc.id, result: out }), {
      status: 200,
    });
  });
  vi.stubGlobal("fetch", fn);
  return { fn, seen };
}

function mathResult(text: string) {
  return {
    sender: { id: "example/math_agent", role: "assistant" },
    recipient: { id: "human_user" },
    content: { type: "text", text },
    model: "deterministic",
    stopReason: "endTurn",
  };
}

function makeApp(pollMs = 2000): App {
  document.body.innerHTML = '<div id="app"></div>';
  window.location.hash = "";
  return new App(document.getElementById("app")!, new RpcClient("http://registry.test"), {
    pollMs,
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
  vi.useRealTimers();
});

describe("polling", () => {
  it("renders cards from the first snapshot", async () => {
    stubRegistry(() => snapshot());
    const app = makeApp();
    await app.pollOnce();
    expect(document.querySelectorAll(".node-card").length).toBe(1);
    expect(document.querySelector(".banner-error")).toBeNull();
  });

  it("shows a banner when the registry is unreachable and keeps stale data", async () => {
    let down = false;
    stubRegistry(() => (down ? new Error("connect ECONNREFUSED") : snapshot()));
    const app = makeApp();
    await app.pollOnce();
    down = true;
    await app.pollOnce();
    expect(document.querySelector(".banner-error")?.textContent).toContain("ECONNREFUSED");
    // the last good snapshot stays on screen
    expect(document.querySelectorAll(".node-card").length).toBe(1);
    expect(document.querySelector(".node-name")?.textContent).toBe("aios-compute-1");
  });

  it("clears the banner after the retry button succeeds", async () => {
    let down = true;
    stubRegistry(() => (down ? new Error("boom") : snapshot()));
    const app = makeApp();
    await app.pollOnce();
    expect(document.querySelector(".banner-error")).not.toBeNull();
    down = false;
    document.querySelector<HTMLButtonElement>(".banner-retry")!.click();
    await vi.waitFor(() => {
      expect(document.querySelector(".banner-error")).toBeNull();
    });
    expect(document.querySelectorAll(".node-card").length).toBe(1);
  });

  it("keeps at most one poll in flight", async () => {
    vi.useFakeTimers();
    const fn = vi.fn(() => new Promise<Response>(() => {})); // never resolves
    vi.stubGlobal("fetch", fn);
    const app = makeApp(50);
    app.start();
    await vi.advanceTimersByTimeAsync(500);
    expect(fn).toHaveBeenCalledTimes(1);
    app.stop();
  });

  it("polls on the configured interval once responses come back", async () => {
    vi.useFakeTimers();
    const { fn } = stubRegistry(() => snapshot());
    const app = makeApp(50);
    app.start();
    await vi.advanceTimersByTimeAsync(260);
    expect(fn.mock.calls.length).toBeGreaterThanOrEqual(4);
    app.stop();
  });
});

describe("routing", () => {
  it("opens the detail view from a card and goes back", async () => {
    stubRegistry(() => snapshot());
    const app = makeApp();
    await app.pollOnce();
    document.querySelector<HTMLButtonElement>(".open-node")!.click();
    expect(window.location.hash).toBe("#/node/Node_42");
    expect(document.querySelector(".detail")).not.toBeNull();
    document.querySelector<HTMLButtonElement>(".back-link")!.click();
    expect(document.querySelector(".overview")).not.toBeNull();
  });

  it("shows not-found for ids that were never registered", async () => {
    stubRegistry(() => snapshot());
    const app = makeApp();
    await app.pollOnce();
    window.location.hash = "#/node/ghost";
    app.render();
    expect(document.querySelector(".not-found")).not.toBeNull();
    expect(document.querySelector(".not-found-text")?.textContent).toContain("ghost");
  });

  it("disables the task form when the node drops out mid-view", async () => {
    let present = true;
    stubRegistry(() => {
      const snap = snapshot();
      if (!present) snap.nodes = [];
      return snap;
    });
    const app = makeApp();
    await app.pollOnce();
    window.location.hash = "#/node/Node_42";
    app.render();
    expect(document.querySelector<HTMLTextAreaElement>(".task-input")!.disabled).toBe(false);

    present = false;
    await app.pollOnce();
    // the view survives on last-seen data, but nothing can be submitted
    expect(document.querySelector(".detail")).not.toBeNull();
    expect(document.querySelector<HTMLElement>(".vanished-notice")!.hidden).toBe(false);
    expect(document.querySelector<HTMLTextAreaElement>(".task-input")!.disabled).toBe(true);

    present = true;
    await app.pollOnce();
    expect(document.querySelector<HTMLTextAreaElement>(".task-input")!.disabled).toBe(false);
  });
});

describe("task submission", () => {
  async function submitOnce(app: App, text: string): Promise<void> {
    document.querySelector<HTMLSelectElement>(".agent-select")!.value = "example/math_agent";
    document.querySelector<HTMLTextAreaElement>(".task-input")!.value = text;
    document
      .querySelector<HTMLFormElement>(".task-form")!
      .dispatchEvent(new Event("submit", { cancelable: true }));
    await vi.waitFor(() => {
      expect(app.store.log.length).toBeGreaterThan(0);
    });
  }

  it("logs a successful task with matching request and response ids", async () => {
    const { seen } = stubRegistry((doc) =>
      doc.method === "aios/relayTask" ? mathResult("14") : snapshot(),
    );
    const app = makeApp();
    await app.pollOnce();
    window.location.hash = "#/node/Node_42";
    app.render();
    await submitOnce(app, "2+3*4");

    const entry = app.store.log[0];
    expect(entry.ok).toBe(true);
    expect(entry.response?.id).toBe(entry.request.id);
    expect(entry.node_id).toBe("Node_42");
    expect(entry.latency_ms).toBeGreaterThanOrEqual(0);

    const relay = seen.find((d) => d.method === "aios/relayTask")!;
    expect(relay.params.node_id).toBe("Node_42");

    const dom = document.querySelector<HTMLElement>(".log-entry")!;
    expect(dom.classList.contains("log-entry-error")).toBe(false);
    expect(dom.querySelector(".response-text")?.textContent).toBe("14");
    const shownReq = JSON.parse(dom.querySelector(".request-json")!.textContent!);
    const shownRes = JSON.parse(dom.querySelector(".response-json")!.textContent!);
    expect(shownRes.id).toBe(shownReq.id);
  });

  it("carries prior turns so a follow-up refines the conversation", async () => {
    const { seen } = stubRegistry((doc) =>
      doc.method === "aios/relayTask" ? mathResult("14") : snapshot(),
    );
    const app = makeApp();
    await app.pollOnce();
    window.location.hash = "#/node/Node_42";
    app.render();
    await submitOnce(app, "2+3*4");
    document.querySelector<HTMLTextAreaElement>(".task-input")!.value = "now add 1";
    document
      .querySelector<HTMLFormElement>(".task-form")!
      .dispatchEvent(new Event("submit", { cancelable: true }));
    await vi.waitFor(() => {
      expect(app.store.log.length).toBe(2);
    });

    const second = seen.filter((d) => d.method === "aios/relayTask")[1];
    const task = second.params.task as { messages: { role: string; content: { text: string } }[] };
    expect(task.messages.map((m) => m.role)).toEqual(["user", "assistant", "user"]);
    expect(task.messages[1].content.text).toBe("14");
    expect(task.messages[2].content.text).toBe("now add 1");
  });

  it("keeps the log append-only and its entries frozen", async () => {
    stubRegistry((doc) => (doc.method === "aios/relayTask" ? mathResult("14") : snapshot()));
    const app = makeApp();
    await app.pollOnce();
    window.location.hash = "#/node/Node_42";
    app.render();
    await submitOnce(app, "2+3*4");
    const first = app.store.log[0];
    expect(Object.isFrozen(first)).toBe(true);
    expect(Object.isFrozen(first.request)).toBe(true);
    expect(Object.isFrozen(first.request.params)).toBe(true);
    expect(Object.isFrozen(first.response)).toBe(true);
    expect(() => {
      (first as { ok: boolean }).ok = false;
    }).toThrow(TypeError);

    document.querySelector<HTMLTextAreaElement>(".task-input")!.value = "again";
    document
      .querySelector<HTMLFormElement>(".task-form")!
      .dispatchEvent(new Event("submit", { cancelable: true }));
    await vi.waitFor(() => {
      expect(app.store.log.length).toBe(2);
    });
    expect(app.store.log[0]).toBe(first); // earlier entries untouched
  });

  it("renders registry errors as error-styled entries", async () => {
    const fn = vi.fn(async (_url: unknown, init?: RequestInit) => {
      const doc = JSON.parse(String(init?.body)) as RpcDoc;
      if (doc.method === "aios/relayTask") {
        return new Response(
          JSON.stringify({
            jsonrpc: "2.0",
            id: doc.id,
            error: { code: -32001, message: "no registered node 'Node_42'" },
          }),
        );
      }
      return new Response(JSON.stringify({ jsonrpc: "2.0", id: doc.id, result: snapshot() }));
    });
    vi.stubGlobal("fetch", fn);
    const app = makeApp();
    await app.pollOnce();
    window.location.hash = "#/node/Node_42";
    app.render();
    await submitOnce(app, "2+3*4");

    const entry = app.store.log[0];
    expect(entry.ok).toBe(false);
    expect(entry.note).toContain("-32001");
    const dom = document.querySelector<HTMLElement>(".log-entry")!;
    expect(dom.classList.contains("log-entry-error")).toBe(true);
  });

  it("logs transport failures with the request that was attempted", async () => {
    stubRegistry((doc) =>
      doc.method === "aios/relayTask" ? new Error("fetch failed") : snapshot(),
    );
    const app = makeApp();
    await app.pollOnce();
    window.location.hash = "#/node/Node_42";
    app.render();
    await submitOnce(app, "2+3*4");

    const entry = app.store.log[0];
    expect(entry.ok).toBe(false);
    expect(entry.response).toBeNull();
    expect(entry.note).toContain("fetch failed");
    expect(entry.request.method).toBe("aios/relayTask");
    expect(document.querySelector(".log-entry-error")).not.toBeNull();
  });
});
