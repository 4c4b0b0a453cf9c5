/** Session client: request/reply correlation and event fan-out over any
 * transport carrying the NDJSON message bodies (WebSocket in the browser,
 * raw TCP in tests). */

import {
  AckMessage, ClientMessage, ControlAction, ErrorMessage, FrameMessage,
  LineSplitter, MetricsMessage, SchemaMessage, ServerMessage, StatusMessage,
  encodeMessage, parseServerMessage,
} from "./protocol.js";

export interface Transport {
  send(data: string): void;
  onMessage(cb: (data: string) => void): void;
  onClose(cb: () => void): void;
  close(): void;
}

export type Reply = AckMessage | ErrorMessage;

interface Pending {
  resolve: (msg: Reply) => void;
  reject: (err: Error) => void;
}

export class SessionClient {
  schema: SchemaMessage | null = null;
  latestFrame: FrameMessage | null = null;
  running = false;
  connected = true;

  private nextId = 1;
  private pending = new Map<number, Pending>();
  private splitter = new LineSplitter();
  private frameListeners: ((f: FrameMessage) => void)[] = [];
  private metricsListeners: ((m: MetricsMessage) => void)[] = [];
  private statusListeners: ((s: StatusMessage) => void)[] = [];
  private schemaListeners: ((s: SchemaMessage) => void)[] = [];
  private errorListeners: ((e: ErrorMessage) => void)[] = [];

  constructor(private transport: Transport) {
    transport.onMessage((data) => {
      for (const line of this.splitter.feed(data.endsWith("\n") ? data : data + "\n")) {
        this.dispatch(parseServerMessage(line));
      }
    });
    transport.onClose(() => {
      this.connected = false;
      for (const p of this.pending.values()) {
        p.reject(new Error("connection closed"));
      }
      this.pending.clear();
    });
  }

  onFrame(cb: (f: FrameMessage) => void): void {
    this.frameListeners.push(cb);
  }

  onMetrics(cb: (m: MetricsMessage) => void): void {
    this.metricsListeners.push(cb);
  }

  onStatus(cb: (s: StatusMessage) => void): void {
    this.statusListeners.push(cb);
  }

  onSchema(cb: (s: SchemaMessage) => void): void {
    this.schemaListeners.push(cb);
  }

  onServerError(cb: (e: ErrorMessage) => void): void {
    this.errorListeners.push(cb);
  }

  private dispatch(msg: ServerMessage): void {
    switch (msg.type) {
      case "schema":
        this.schema = msg;
        this.schemaListeners.forEach((cb) => cb(msg));
        return;
      case "frame":
        this.latestFrame = msg;
        this.frameListeners.forEach((cb) => cb(msg));
        return;
      case "metrics":
        this.metricsListeners.forEach((cb) => cb(msg));
        return;
      case "status":
        this.running = msg.running;
        this.statusListeners.forEach((cb) => cb(msg));
        return;
      case "ack":
      case "error": {
        const id = msg.id;
        if (typeof id === "number" && this.pending.has(id)) {
          const p = this.pending.get(id)!;
          this.pending.delete(id);
          p.resolve(msg);
        } else if (msg.type === "error") {
          this.errorListeners.forEach((cb) => cb(msg));
        }
        return;
      }
    }
  }

  request(msg: ClientMessage, timeoutMs = 10000): Promise<Reply> {
    if (!this.connected) {
      return Promise.reject(new Error("not connected"));
    }
    const id = this.nextId++;
    const body = { ...msg, id };
    return new Promise<Reply>((resolve, reject) => {
      const timer = setTimeout(() => {
        this.pending.delete(id);
        reject(new Error(`timeout waiting for reply to ${msg.type}`));
      }, timeoutMs);
      this.pending.set(id, {
        resolve: (reply) => {
          clearTimeout(timer);
          resolve(reply);
        },
        reject: (err) => {
          clearTimeout(timer);
          reject(err);
        },
      });
      this.transport.send(encodeMessage(body));
    });
  }

  control(action: ControlAction, steps?: number): Promise<Reply> {
    return this.request({ type: "control", action, ...(steps ? { steps } : {}) });
  }

  command(text: string): Promise<Reply> {
    return this.request({ type: "command", text });
  }

  setParam(name: string, value: number | string): Promise<Reply> {
    return this.request({ type: "set-param", name, value });
  }

  subscribe(channels: string[]): Promise<Reply> {
    return this.request({ type: "subscribe", channels });
  }

  close(): void {
    this.transport.close();
  }
}

/** Browser transport: one JSON body per WebSocket text message. */
export class WsTransport implements Transport {
  private ws: WebSocket;
  private messageCb: ((data: string) => void) | null = null;
  private closeCb: (() => void) | null = null;

  constructor(url: string) {
    this.ws = new WebSocket(url);
    this.ws.onmessage = (ev) => {
      if (this.messageCb) this.messageCb(String(ev.data));
    };
    this.ws.onclose = () => {
      if (this.closeCb) this.closeCb();
    };
  }

  ready(): Promise<void> {
    if (this.ws.readyState === WebSocket.OPEN) return Promise.resolve();
    return new Promise((resolve, reject) => {
      this.ws.addEventListener("open", () => resolve());
      this.ws.addEventListener("error", () => reject(new Error("websocket error")));
    });
  }

  send(data: string): void {
    this.ws.send(data);
  }

  onMessage(cb: (data: string) => void): void {
    this.messageCb = cb;
  }

  onClose(cb: () => void): void {
    this.closeCb = cb;
  }

  close(): void {
    this.ws.close();
  }
}
