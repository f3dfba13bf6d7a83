import type { StreamEvent } from "./types";

export interface StreamHandlers {
  onEvent(event: StreamEvent): void;
  onConnection(connected: boolean): void;
}

type WebSocketCtor = new (url: string) => WebSocket;

/** One WebSocket per open scene, with automatic reconnect. The server sends
 * a full snapshot on connect, so a reconnect always converges to the latest
 * version without client-side bookkeeping. */
export class SceneStream {
  private socket: WebSocket | null = null;
  private closed = false;
  private retryDelay = 250;

  constructor(
    private url: string,
    private handlers: StreamHandlers,
    private wsCtor: WebSocketCtor = WebSocket,
    private reconnectDelayMs = 1000,
  ) {}

  connect(): void {
    if (this.closed) return;
    const socket = new this.wsCtor(this.url);
    this.socket = socket;
    socket.onopen = () => {
      this.retryDelay = this.reconnectDelayMs;
      this.handlers.onConnection(true);
    };
    socket.onmessage = (message: MessageEvent) => {
      try {
        this.handlers.onEvent(JSON.parse(String(message.data)) as StreamEvent);
      } catch {
        // non-JSON frames are ignored
      }
    };
    socket.onclose = () => {
      this.handlers.onConnection(false);
      if (!this.closed) {
        setTimeout(() => this.connect(), this.retryDelay);
      }
    };
    socket.onerror = () => socket.close();
  }

  close(): void {
    this.closed = true;
    this.socket?.close();
  }
}
