import { describe, expect, it } from "vitest";

import listNodesFixture from "../src/generated/list_nodes.fixture.json";
import type { RegistryNodeEntry, RegistrySnapshot } from "../src/types";
import { applyDetailState, renderDetail, renderNotFound } from "../src/views";

const snapshot = listNodesFixture as unknown as RegistrySnapshot;

function entry(): RegistryNodeEntry {
  return structuredClone(snapshot.nodes[0]) as RegistryNodeEntry;
}

const noHandlers = { onBack: () => {}, onSubmit: () => {} };

function submitForm(view: HTMLElement): void {
  view
    .querySelector<HTMLFormElement>(".task-form")!
    .dispatchEvent(new Event("submit", { cancelable: true }));
}

describe("node detail", () => {
  it("offers every available agent in the selector", () => {
    const view = renderDetail(entry(), { vanished: false, busy: false }, noHandlers);
    const options = [...view.querySelectorAll<HTMLOptionElement>(".agent-select option")].map(
      (o) => o.value,
    );
    expect(options).toEqual([
      "example/academic_agent",
      "example/math_agent",
      "example/language_tutor",
    ]);
    expect(view.querySelector<HTMLInputElement>(".max-tokens")?.value).toBe("200");
    expect(view.querySelector(".meta-node-id")?.textContent).toBe("Node_42");
    expect(view.querySelector(".meta-address")?.textContent).toBe("10.1.0.42:8080");
  });

  it("submits the chosen agent, text and token budget", () => {
    const got: unknown[] = [];
    const view = renderDetail(
      entry(),
      { vanished: false, busy: false },
      { onBack: () => {}, onSubmit: (...args) => got.push(args) },
    );
    view.querySelector<HTMLSelectElement>(".agent-select")!.value = "example/math_agent";
    view.querySelector<HTMLTextAreaElement>(".task-input")!.value = "  2+3*4  ";
    view.querySelector<HTMLInputElement>(".max-tokens")!.value = "64";
    submitForm(view);
    expect(got).toEqual([["example/math_agent", "2+3*4", 64]]);
  });

  it("ignores submission of blank tasks", () => {
    let called = 0;
    const view = renderDetail(
      entry(),
      { vanished: false, busy: false },
      { onBack: () => {}, onSubmit: () => (called += 1) },
    );
    view.querySelector<HTMLTextAreaElement>(".task-input")!.value = "   ";
    submitForm(view);
    expect(called).toBe(0);
  });

  it("disables every input when the node vanished, with a notice", () => {
    let called = 0;
    const view = renderDetail(
      entry(),
      { vanished: true, busy: false },
      { onBack: () => {}, onSubmit: () => (called += 1) },
    );
    const notice = view.querySelector<HTMLElement>(".vanished-notice")!;
    expect(notice.hidden).toBe(false);
    for (const selector of [".agent-select", ".task-input", ".max-tokens", ".submit-task"]) {
      expect(view.querySelector<HTMLInputElement>(selector)!.disabled).toBe(true);
    }
    view.querySelector<HTMLTextAreaElement>(".task-input")!.value = "anything";
    submitForm(view);
    expect(called).toBe(0);
  });

  it("refreshes gauges in place without clobbering a draft task", () => {
    const view = renderDetail(entry(), { vanished: false, busy: false }, noHandlers);
    document.body.append(view);
    const input = view.querySelector<HTMLTextAreaElement>(".task-input")!;
    input.value = "half-typed thought";

    const updated = entry();
    updated.report.system_info.cpu_percent = 50.5;
    updated.health = "stale";
    applyDetailState(view, updated, { vanished: false, busy: false });

    expect(input.value).toBe("half-typed thought");
    expect(view.querySelectorAll(".gauge-value")[0].textContent).toBe("50.5%");
    expect(view.querySelector(".badge")?.classList.contains("badge-stale")).toBe(true);
    view.remove();
  });

  it("re-enables inputs when a vanished node comes back", () => {
    const view = renderDetail(entry(), { vanished: true, busy: false }, noHandlers);
    applyDetailState(view, entry(), { vanished: false, busy: false });
    expect(view.querySelector<HTMLElement>(".vanished-notice")!.hidden).toBe(true);
    expect(view.querySelector<HTMLInputElement>(".task-input")!.disabled).toBe(false);
  });

  it("keeps the agent selection when the agent list is unchanged", () => {
    const view = renderDetail(entry(), { vanished: false, busy: false }, noHandlers);
    const select = view.querySelector<HTMLSelectElement>(".agent-select")!;
    select.value = "example/language_tutor";
    applyDetailState(view, entry(), { vanished: false, busy: false });
    expect(select.value).toBe("example/language_tutor");
  });

  it("renders a not-found view for unknown ids", () => {
    let back = 0;
    const view = renderNotFound("node-which-never-was", () => (back += 1));
    expect(view.querySelector(".not-found-text")?.textContent).toContain("node-which-never-was");
    view.querySelector<HTMLButtonElement>(".back-link")!.click();
    expect(back).toBe(1);
  });
});
