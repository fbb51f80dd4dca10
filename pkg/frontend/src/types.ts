// Wire shapes mirrored from the server's pydantic models. The JSON schemas in
// src/generated/ are the source of truth; these interfaces just give the
// compiler something to check against.

export interface Endpoint {
  id: string;
  role?: string | null;
}

export interface MessageContent {
  type: "text";
  text: string;
}

export interface ChatMessage {
  role: string;
  content: MessageContent;
}

export interface HumanTaskParams {
  sender: Endpoint;
  recipient: Endpoint;
  messages: ChatMessage[];
  maxTokens: number;
}

export interface RpcRequest {
  jsonrpc: "2.0";
  id: string;
  method: string;
  params: Record<string, unknown>;
}

export interface RpcErrorShape {
  code: number;
  message: string;
  data?: unknown;
}

export interface RpcResponse {
  jsonrpc: "2.0";
  id: string;
  result?: Record<string, unknown>;
  error?: RpcErrorShape;
}

export interface SystemInfo {
  cpu_percent: number;
  memory_percent: number;
  platform: string;
}

export interface NodeStatusReport {
  node_id: string;
  node_name: string;
  timestamp: string;
  system_info: SystemInfo;
  available_agents: string[];
}

export interface AgentMetadata {
  agent_id: string;
  [extra: string]: unknown;
}

export type Health = "online" | "stale" | "offline";

export interface RegistryNodeEntry {
  report: NodeStatusReport;
  address: string;
  first_seen: string;
  last_report: string;
  health: Health;
  agents: AgentMetadata[];
  flagged_agents: string[];
}

export interface RegistrySnapshot {
  nodes: RegistryNodeEntry[];
  agents: Record<string, string[]>;
  version: number;
}

/** One submitted task: the exact request sent and the exact response received. */
export interface TaskLogEntry {
  timestamp: string;
  node_id: string;
  agent_id: string;
  request: RpcRequest;
  response: RpcResponse | null;
  latency_ms: number;
  ok: boolean;
  /** transport-level failure text when no response document exists */
  note?: string;
}
