// WebSocket wrapper: command ids, the single-slot offline queue, and
// reconnect-free status reporting (the console treats a drop as terminal
// until the page is reloaded or connect() is called again).

export interface SocketCallbacks {
  onMessage: (raw: string) => void;
  onStatus: (status: 'connecting' | 'connected' | 'disconnected') => void;
  onNotice: (notice: string) => void;
}

export class ConsoleSocket {
  private ws: WebSocket | null = null;
  private nextId = 1;
  private queued: string | null = null; // at most one command while offline
  private callbacks: SocketCallbacks;

  constructor(callbacks: SocketCallbacks) {
    this.callbacks = callbacks;
  }

  connect(url: string): void {
    this.callbacks.onStatus('connecting');
    this.ws = new WebSocket(url);
    this.ws.onopen = () => {
      this.callbacks.onStatus('connected');
      if (this.queued !== null) {
        this.ws!.send(this.queued);
        this.queued = null;
      }
    };
    this.ws.onmessage = (event: MessageEvent) => {
      this.callbacks.onMessage(String(event.data));
    };
    this.ws.onclose = () => this.callbacks.onStatus('disconnected');
    this.ws.onerror = () => this.callbacks.onStatus('disconnected');
  }

  get connected(): boolean {
    return this.ws !== null && this.ws.readyState === WebSocket.OPEN;
  }

  /** Send a command; returns its id, or null if it could not be sent. */
  send(type: 'perform' | 'set_config' | 'reset', extra: Record<string, unknown> = {}): string | null {
    const id = `c${this.nextId++}`;
    const raw = JSON.stringify({ v: 1, type, id, ...extra });
    if (this.connected) {
      this.ws!.send(raw);
      return id;
    }
    if (this.queued === null) {
      this.queued = raw;
      this.callbacks.onNotice('offline: command queued until the connection returns');
      return id;
    }
    this.callbacks.onNotice('offline: command dropped (one already queued)');
    return null;
  }

  sendGesture(kind: string): string | null {
    return this.send('perform', { kind });
  }
}
