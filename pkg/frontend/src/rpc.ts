import Ajv2020 from "ajv/dist/2020";
import type { ErrorObject, ValidateFunction } from "ajv";

import rpcRequestSchema from "./generated/rpc_request.schema.json";
import humanTaskSchema from "./generated/human_task_params.schema.json";
import type {
  ChatMessage,
  HumanTaskParams,
  RegistrySnapshot,
  RpcRequest,
  RpcResponse,
} from "./types";

// The dashboard never invents message shapes: every outbound request is
// checked against the schemas exported from the server models before it
// leaves the process.
const ajv = new Ajv2020({ allErrors: true });
const validateEnvelope: ValidateFunction = ajv.compile(rpcRequestSchema);
const validateTask: ValidateFunction = ajv.compile(humanTaskSchema);

export class ShapeError extends Error {
  readonly errors: ErrorObject[];

  constructor(what: string, errors: ErrorObject[] | null | undefined) {
    const detail = (errors ?? [])
      .map((e) => `${e.instancePath || "/"} ${e.message ?? ""}`.trim())
      .join("; ");
    super(`${what} failed schema validation: ${detail}`);
    this.name = "ShapeError";
    this.errors = errors ?? [];
  }
}

export function checkTaskShape(task: unknown): void {
  if (!validateTask(task)) throw new ShapeError("task params", validateTask.errors);
}

export function checkEnvelopeShape(request: unknown): void {
  if (!validateEnvelope(request)) throw new ShapeError("request envelope", validateEnvelope.errors);
}

let idCounter = 0;

export function nextRequestId(): string {
  idCounter += 1;
  return `ui-${Date.now().toString(36)}-${idCounter}`;
}

export function buildHumanTask(
  agentId: string,
  messages: ChatMessage[],
  maxTokens: number,
): HumanTaskParams {
  return {
    sender: { id: "human_user" },
    recipient: { id: agentId, role: "assistant" },
    messages,
    maxTokens,
  };
}

export function buildRelayRequest(nodeId: string, task: HumanTaskParams): RpcRequest {
  checkTaskShape(task);
  return {
    jsonrpc: "2.0",
    id: nextRequestId(),
    method: "aios/relayTask",
    params: { node_id: nodeId, task: task as unknown as Record<string, unknown> },
  };
}

export class RpcHttpError extends Error {
  constructor(readonly status: number, body: string) {
    super(`HTTP ${status}: ${body.slice(0, 200)}`);
    this.name = "RpcHttpError";
  }
}

export class RpcClient {
  /** @param base origin prefix, e.g. "http://127.0.0.1:9000"; "" for same-origin */
  constructor(readonly base: string = "") {}

  async call(request: RpcRequest): Promise<RpcResponse> {
    checkEnvelopeShape(request);
    const res = await fetch(`${this.base}/rpc`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(request),
    });
    const text = await res.text();
    try {
      return JSON.parse(text) as RpcResponse;
    } catch {
      throw new RpcHttpError(res.status, text);
    }
  }

  async listNodes(): Promise<RegistrySnapshot> {
    const response = await this.call({
      jsonrpc: "2.0",
      id: nextRequestId(),
      method: "aios/listNodes",
      params: {},
    });
    if (response.error) {
      throw new Error(`listNodes failed [${response.error.code}]: ${response.error.message}`);
    }
    return response.result as unknown as RegistrySnapshot;
  }
}
