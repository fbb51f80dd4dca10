import type {
  RegistryNodeEntry,
  RegistrySnapshot,
  RpcResponse,
  TaskLogEntry,
} from "./types";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

// ---------------------------------------------------------------------------
// overview

export function renderBanner(reason: string, onRetry: () => void): HTMLElement {
  const banner = el("div", "banner banner-error");
  banner.append(el("span", "banner-text", `Registry unreachable: ${reason} — showing last known state`));
  const retry = el("button", "banner-retry", "Retry now");
  retry.addEventListener("click", onRetry);
  banner.append(retry);
  return banner;
}

function gauge(label: string, value: number): HTMLElement {
  const wrap = el("div", "gauge");
  wrap.append(el("span", "gauge-label", label));
  const track = el("div", "gauge-track");
  const fill = el("div", "gauge-fill");
  fill.style.width = `${Math.max(0, Math.min(100, value))}%`;
  track.append(fill);
  wrap.append(track);
  // verbatim value, no rounding: operators compare this against node logs
  wrap.append(el("span", "gauge-value", `${value}%`));
  return wrap;
}

export function healthBadge(health: string): HTMLElement {
  return el("span", `badge badge-${health}`, health);
}

export function renderNodeCard(
  entry: RegistryNodeEntry,
  onOpen: (nodeId: string) => void,
): HTMLElement {
  const report = entry.report;
  const card = el("article", `node-card health-${entry.health}`);
  card.dataset.nodeId = report.node_id;

  const head = el("header", "card-head");
  head.append(el("h3", "node-name", report.node_name));
  head.append(healthBadge(entry.health));
  card.append(head);

  card.append(el("p", "node-platform", report.system_info.platform));
  card.append(gauge("cpu", report.system_info.cpu_percent));
  card.append(gauge("memory", report.system_info.memory_percent));

  const agents = el("ul", "agent-list");
  for (const agentId of report.available_agents) {
    agents.append(el("li", "agent-item", agentId));
  }
  card.append(agents);

  const open = el("button", "open-node", "Open");
  open.addEventListener("click", () => onOpen(report.node_id));
  card.append(open);
  return card;
}

export function renderOverview(
  snapshot: RegistrySnapshot | null,
  onOpen: (nodeId: string) => void,
): HTMLElement {
  const section = el("section", "overview");
  if (snapshot === null) {
    section.append(el("p", "empty-state", "Waiting for the first registry snapshot…"));
    return section;
  }
  const nodes = snapshot.nodes;
  section.append(
    el("p", "overview-status", `${nodes.length} node${nodes.length === 1 ? "" : "s"} · index v${snapshot.version}`),
  );
  if (nodes.length === 0) {
    section.append(el("p", "empty-state", "No nodes have registered yet."));
    return section;
  }
  const grid = el("div", "card-grid");
  for (const entry of nodes) grid.append(renderNodeCard(entry, onOpen));
  section.append(grid);
  return section;
}

// ---------------------------------------------------------------------------
// node detail

export interface DetailHandlers {
  onBack: () => void;
  onSubmit: (agentId: string, text: string, maxTokens: number) => void;
}

export interface DetailOptions {
  /** the node dropped out of the snapshot while this view was open */
  vanished: boolean;
  /** a submission is in flight */
  busy: boolean;
}

export function renderNotFound(nodeId: string, onBack: () => void): HTMLElement {
  const section = el("section", "detail not-found");
  section.append(el("h2", "detail-title", "Unknown node"));
  section.append(el("p", "not-found-text", `No node with id ${nodeId} is registered.`));
  const back = el("button", "back-link", "Back to overview");
  back.addEventListener("click", onBack);
  section.append(back);
  return section;
}

export function renderDetail(
  entry: RegistryNodeEntry,
  opts: DetailOptions,
  handlers: DetailHandlers,
): HTMLElement {
  const report = entry.report;
  const section = el("section", `detail health-${entry.health}`);
  section.dataset.nodeId = report.node_id;

  const back = el("button", "back-link", "← Overview");
  back.addEventListener("click", handlers.onBack);
  section.append(back);

  const head = el("header", "detail-head");
  head.append(el("h2", "detail-title", report.node_name));
  head.append(healthBadge(entry.health));
  section.append(head);

  const meta = el("dl", "detail-meta");
  const dd = (term: string, value: string, cls: string) => {
    meta.append(el("dt", undefined, term));
    meta.append(el("dd", cls, value));
  };
  dd("node id", report.node_id, "meta-node-id");
  dd("address", entry.address, "meta-address");
  dd("platform", report.system_info.platform, "meta-platform");
  dd("last report", entry.last_report, "meta-last-report");
  section.append(meta);

  const gauges = el("div", "detail-gauges");
  gauges.append(gauge("cpu", report.system_info.cpu_percent));
  gauges.append(gauge("memory", report.system_info.memory_percent));
  section.append(gauges);

  const notice = el("p", "vanished-notice", "This node dropped out of the registry; inputs are disabled until it reappears.");
  notice.hidden = !opts.vanished;
  section.append(notice);

  const form = el("form", "task-form");
  form.addEventListener("submit", (event) => event.preventDefault());

  const agentSelect = el("select", "agent-select");
  for (const agentId of report.available_agents) {
    const option = el("option", undefined, agentId);
    option.value = agentId;
    agentSelect.append(option);
  }
  form.append(label("Agent", agentSelect));

  const taskInput = el("textarea", "task-input");
  taskInput.rows = 3;
  taskInput.placeholder = "Describe the task…";
  form.append(label("Task", taskInput));

  const maxTokens = el("input", "max-tokens");
  maxTokens.type = "number";
  maxTokens.min = "1";
  maxTokens.value = "200";
  form.append(label("Max tokens", maxTokens));

  const submit = el("button", "submit-task", "Send task");
  submit.type = "submit";
  form.addEventListener("submit", () => {
    if (submit.disabled) return;
    const text = taskInput.value.trim();
    if (!text || !agentSelect.value) return;
    handlers.onSubmit(agentSelect.value, text, Number(maxTokens.value) || 1);
  });
  form.append(submit);
  section.append(form);

  applyDetailState(section, entry, opts);
  return section;
}

function label(text: string, control: HTMLElement): HTMLElement {
  const wrap = el("label", "field");
  wrap.append(el("span", "field-name", text));
  wrap.append(control);
  return wrap;
}

/**
 * Refresh the dynamic parts of an already-rendered detail view in place so a
 * poll tick never clobbers what the operator is typing.
 */
export function applyDetailState(
  section: HTMLElement,
  entry: RegistryNodeEntry,
  opts: DetailOptions,
): void {
  const report = entry.report;
  section.className = `detail health-${entry.health}`;

  const badge = section.querySelector<HTMLElement>(".badge");
  if (badge) {
    badge.className = `badge badge-${entry.health}`;
    badge.textContent = entry.health;
  }
  const values = section.querySelectorAll<HTMLElement>(".detail-gauges .gauge-value");
  const fills = section.querySelectorAll<HTMLElement>(".detail-gauges .gauge-fill");
  const cpu = report.system_info.cpu_percent;
  const mem = report.system_info.memory_percent;
  if (values.length === 2) {
    values[0].textContent = `${cpu}%`;
    values[1].textContent = `${mem}%`;
  }
  if (fills.length === 2) {
    fills[0].style.width = `${Math.max(0, Math.min(100, cpu))}%`;
    fills[1].style.width = `${Math.max(0, Math.min(100, mem))}%`;
  }
  const lastReport = section.querySelector<HTMLElement>(".meta-last-report");
  if (lastReport) lastReport.textContent = entry.last_report;

  const select = section.querySelector<HTMLSelectElement>(".agent-select");
  if (select) {
    const current = Array.from(select.options).map((o) => o.value);
    if (current.join("\n") !== report.available_agents.join("\n")) {
      const keep = select.value;
      select.replaceChildren();
      for (const agentId of report.available_agents) {
        const option = el("option", undefined, agentId);
        option.value = agentId;
        select.append(option);
      }
      if (report.available_agents.includes(keep)) select.value = keep;
    }
  }

  const notice = section.querySelector<HTMLElement>(".vanished-notice");
  if (notice) notice.hidden = !opts.vanished;
  const disabled = opts.vanished || opts.busy;
  for (const control of section.querySelectorAll<HTMLInputElement>(
    ".agent-select, .task-input, .max-tokens, .submit-task",
  )) {
    control.disabled = disabled;
  }
}

// ---------------------------------------------------------------------------
// task log

function responseText(response: RpcResponse | null): string | null {
  const content = response?.result?.content as { text?: unknown } | undefined;
  return typeof content?.text === "string" ? content.text : null;
}

export function renderLogEntry(entry: TaskLogEntry): HTMLElement {
  const article = el("article", entry.ok ? "log-entry" : "log-entry log-entry-error");
  article.dataset.requestId = entry.request.id;

  const head = el("header", "log-head");
  head.append(el("time", "log-time", entry.timestamp));
  head.append(el("span", "log-node", entry.node_id));
  head.append(el("span", "log-agent", entry.agent_id));
  head.append(el("span", "log-latency", `${entry.latency_ms.toFixed(1)} ms`));
  if (!entry.ok) head.append(el("span", "log-failed", entry.note ?? entry.response?.error?.message ?? "failed"));
  article.append(head);

  const text = responseText(entry.response);
  if (text !== null) article.append(el("p", "response-text", text));

  const bodies = el("div", "log-bodies");
  const req = el("pre", "request-json", JSON.stringify(entry.request, null, 2));
  bodies.append(req);
  const res = el(
    "pre",
    "response-json",
    entry.response === null ? `(no response: ${entry.note ?? "transport failure"})` : JSON.stringify(entry.response, null, 2),
  );
  bodies.append(res);
  article.append(bodies);
  return article;
}

export function renderLog(entries: ReadonlyArray<TaskLogEntry>): HTMLElement {
  const section = el("section", "task-log");
  section.append(el("h2", "log-title", "Task log"));
  if (entries.length === 0) {
    section.append(el("p", "empty-state", "No tasks submitted yet."));
    return section;
  }
  // newest first
  for (let i = entries.length - 1; i >= 0; i -= 1) {
    section.append(renderLogEntry(entries[i]));
  }
  return section;
}
