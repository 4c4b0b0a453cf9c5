/** Wire protocol: newline-delimited JSON bodies shared by TCP and WebSocket. */

export interface ParamSpec {
  name: string;
  type: "int" | "float" | "choice";
  default: number | string;
  live: boolean;
  min?: number;
  max?: number;
  choices?: (number | string)[];
}

export interface SchemaMessage {
  type: "schema";
  model: string;
  params: ParamSpec[];
  reporters: string[];
  world: { width: number; height: number; wrap: boolean; seed: number };
}

/** One agent row: [id, breed, x, y, heading, color, state]. */
export type AgentRow = [number, string, number, number, number, number, string];

export interface FrameMessage {
  type: "frame";
  tick: number;
  agents: AgentRow[];
  links: [number, number][];
  patches: [number, number, number][];
  metrics: Record<string, number | null>;
}

export interface MetricsMessage {
  type: "metrics";
  tick: number;
  values: Record<string, number | null>;
}

export interface AckMessage {
  type: "ack";
  id?: number;
  action?: string;
  tick?: number;
  values?: string[];
  deferred?: boolean;
  [key: string]: unknown;
}

export interface ErrorMessage {
  type: "error";
  id?: number;
  message: string;
  line?: number;
  col?: number;
}

export interface StatusMessage {
  type: "status";
  running: boolean;
  tick: number;
}

export type ServerMessage =
  | SchemaMessage
  | FrameMessage
  | MetricsMessage
  | AckMessage
  | ErrorMessage
  | StatusMessage;

export type ControlAction = "setup" | "go" | "stop" | "step" | "release";

export type ClientMessage =
  | { id?: number; type: "command"; text: string }
  | { id?: number; type: "control"; action: ControlAction; steps?: number }
  | { id?: number; type: "set-param"; name: string; value: number | string }
  | { id?: number; type: "subscribe"; channels: string[] };

export function encodeMessage(msg: ClientMessage): string {
  return JSON.stringify(msg) + "\n";
}

export function parseServerMessage(line: string): ServerMessage {
  const obj = JSON.parse(line) as Record<string, unknown>;
  const type = obj["type"];
  if (
    type !== "schema" && type !== "frame" && type !== "metrics" &&
    type !== "ack" && type !== "error" && type !== "status"
  ) {
    throw new Error(`unknown server message type: ${String(type)}`);
  }
  return obj as unknown as ServerMessage;
}

/** Reassembles newline-delimited messages from arbitrary chunk boundaries. */
export class LineSplitter {
  private buffer = "";

  feed(chunk: string): string[] {
    this.buffer += chunk;
    const lines: string[] = [];
    let idx: number;
    while ((idx = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, idx).trim();
      this.buffer = this.buffer.slice(idx + 1);
      if (line.length > 0) lines.push(line);
    }
    return lines;
  }

  pending(): string {
    return this.buffer;
  }
}
