import { RpcClient, buildHumanTask, buildRelayRequest } from "./rpc";
import { Store } from "./state";
import type { ChatMessage, RegistryNodeEntry, RpcRequest, RpcResponse, TaskLogEntry } from "./types";
import {
  applyDetailState,
  el,
  renderBanner,
  renderDetail,
  renderLog,
  renderNotFound,
  renderOverview,
} from "./views";

export interface AppOptions {
  pollMs?: number;
}

type Route = { view: "overview" } | { view: "node"; nodeId: string };

export function parseRoute(hash: string): Route {
  const match = /^#\/node\/(.+)$/.exec(hash);
  if (match) return { view: "node", nodeId: decodeURIComponent(match[1]) };
  return { view: "overview" };
}

export class App {
  readonly store = new Store();
  private readonly pollMs: number;
  private pollTimer: ReturnType<typeof setInterval> | null = null;
  private pollInFlight = false;
  private busy = false;
  /** last entry seen per node id, so a vanished node still renders (disabled) */
  private readonly lastSeen = new Map<string, RegistryNodeEntry>();

  constructor(
    private readonly root: HTMLElement,
    private readonly client: RpcClient,
    options: AppOptions = {},
  ) {
    this.pollMs = options.pollMs ?? 2000;
  }

  start(): void {
    window.addEventListener("hashchange", () => this.render());
    this.render();
    void this.pollOnce();
    this.pollTimer = setInterval(() => void this.pollOnce(), this.pollMs);
  }

  stop(): void {
    if (this.pollTimer !== null) clearInterval(this.pollTimer);
    this.pollTimer = null;
  }

  async pollOnce(): Promise<void> {
    if (this.pollInFlight) return;
    this.pollInFlight = true;
    try {
      const snapshot = await this.client.listNodes();
      this.store.applySnapshot(snapshot);
      for (const entry of snapshot.nodes) this.lastSeen.set(entry.report.node_id, entry);
    } catch (err) {
      this.store.markUnreachable(err instanceof Error ? err.message : String(err));
    } finally {
      this.pollInFlight = false;
    }
    this.render();
  }

  route(): Route {
    return parseRoute(window.location.hash);
  }

  private openNode(nodeId: string): void {
    window.location.hash = `#/node/${encodeURIComponent(nodeId)}`;
    this.render();
  }

  private openOverview(): void {
    window.location.hash = "#/";
    this.render();
  }

  render(): void {
    const route = this.route();

    let banner = this.root.querySelector<HTMLElement>(".banner-slot");
    if (!banner) {
      this.root.replaceChildren();
      const header = el("header", "app-head");
      header.append(el("h1", "app-title", "Agent Network Dashboard"));
      this.root.append(header);
      banner = el("div", "banner-slot");
      this.root.append(banner);
      this.root.append(el("main", "main-slot"));
      this.root.append(el("div", "log-slot"));
    }

    banner.replaceChildren();
    if (this.store.pollError !== null) {
      banner.append(renderBanner(this.store.pollError, () => void this.pollOnce()));
    }

    const main = this.root.querySelector<HTMLElement>(".main-slot")!;
    if (route.view === "overview") {
      main.replaceChildren(renderOverview(this.store.snapshot, (id) => this.openNode(id)));
    } else {
      this.renderNode(main, route.nodeId);
    }

    const logSlot = this.root.querySelector<HTMLElement>(".log-slot")!;
    logSlot.replaceChildren(renderLog(this.store.log));
  }

  private renderNode(main: HTMLElement, nodeId: string): void {
    const live = this.store.nodeById(nodeId);
    const entry = live ?? this.lastSeen.get(nodeId) ?? null;
    if (entry === null) {
      main.replaceChildren(renderNotFound(nodeId, () => this.openOverview()));
      return;
    }
    const opts = { vanished: live === null, busy: this.busy };
    const existing = main.querySelector<HTMLElement>(".detail");
    if (existing && existing.dataset.nodeId === nodeId) {
      // in-place refresh keeps the operator's half-typed task intact
      applyDetailState(existing, entry, opts);
      return;
    }
    main.replaceChildren(
      renderDetail(entry, opts, {
        onBack: () => this.openOverview(),
        onSubmit: (agentId, text, maxTokens) => void this.submitTask(nodeId, agentId, text, maxTokens),
      }),
    );
  }

  /**
   * Send one task turn to an agent via the registry relay. Prior turns with
   * the same agent on the same node ride along so follow-up prompts refine
   * the conversation instead of restarting it.
   */
  async submitTask(nodeId: string, agentId: string, text: string, maxTokens: number): Promise<void> {
    const prior = this.store.conversation(nodeId, agentId);
    const messages: ChatMessage[] = [...prior, { role: "user", content: { type: "text", text } }];
    const request: RpcRequest = buildRelayRequest(nodeId, buildHumanTask(agentId, messages, maxTokens));

    this.busy = true;
    this.render();
    const started = performance.now();
    let response: RpcResponse | null = null;
    let note: string | undefined;
    try {
      response = await this.client.call(request);
    } catch (err) {
      note = err instanceof Error ? err.message : String(err);
    }
    const latency = performance.now() - started;

    let ok = false;
    if (response !== null) {
      if (response.id !== request.id) {
        note = `response id ${JSON.stringify(response.id)} does not match request id`;
      } else if (response.error) {
        note = `[${response.error.code}] ${response.error.message}`;
      } else {
        ok = true;
      }
    }

    const entry: TaskLogEntry = {
      timestamp: new Date().toISOString(),
      node_id: nodeId,
      agent_id: agentId,
      request,
      response,
      latency_ms: latency,
      ok,
      note,
    };
    this.store.appendLog(entry);

    if (ok && response?.result) {
      const reply = response.result.content as ChatMessage["content"] | undefined;
      if (reply && typeof reply.text === "string") {
        this.store.recordTurn(nodeId, agentId, [
          ...messages,
          { role: "assistant", content: reply },
        ]);
      }
    }

    this.busy = false;
    this.render();
    if (ok) {
      // keep a failed draft around for another try, clear a delivered one
      const input = this.root.querySelector<HTMLTextAreaElement>(".task-input");
      if (input) input.value = "";
    }
  }
}
