/**
 * Frame transports: raw TCP for Node (tests, tooling) and WebSocket for the
 * browser (via tools/ws-bridge.mjs, which relays ws <-> tcp locally).
 */

export interface FrameTransport {
  send(line: string): void;
  onLine(cb: (line: string) => void): void;
  onClose(cb: () => void): void;
  close(): void;
}

export class TcpTransport implements FrameTransport {
  private lineCb: ((line: string) => void) | null = null;
  private closeCb: (() => void) | null = null;
  private buffer = "";
  // deferred type: node:net is only present under Node
  private socket: import("node:net").Socket;

  private constructor(socket: import("node:net").Socket) {
    this.socket = socket;
    socket.setNoDelay(true);
    socket.on("data", (chunk: Buffer) => {
      this.buffer += chunk.toString("utf-8");
      let idx;
      while ((idx = this.buffer.indexOf("\n")) >= 0) {
        const line = this.buffer.slice(0, idx);
        this.buffer = this.buffer.slice(idx + 1);
        if (line.trim() && this.lineCb) this.lineCb(line);
      }
    });
    socket.on("close", () => this.closeCb?.());
    socket.on("error", () => this.closeCb?.());
  }

  static async connect(host: string, port: number,
                       timeoutMs = 10_000): Promise<TcpTransport> {
    const net = await import("node:net");
    const deadline = Date.now() + timeoutMs;
    // the server may still be binding; retry until the deadline
    for (;;) {
      try {
        const socket = await new Promise<import("node:net").Socket>(
          (resolve, reject) => {
            const s = net.createConnection({ host, port }, () => resolve(s));
            s.once("error", reject);
          });
        return new TcpTransport(socket);
      } catch (err) {
        if (Date.now() > deadline) throw err;
        await new Promise((r) => setTimeout(r, 50));
      }
    }
  }

  send(line: string): void {
    this.socket.write(line.endsWith("\n") ? line : line + "\n");
  }

  onLine(cb: (line: string) => void): void {
    this.lineCb = cb;
  }

  onClose(cb: () => void): void {
    this.closeCb = cb;
  }

  close(): void {
    this.socket.destroy();
  }
}

export class WsTransport implements FrameTransport {
  private ws: WebSocket;
  private lineCb: ((line: string) => void) | null = null;
  private closeCb: (() => void) | null = null;
  private pending: string[] = [];

  constructor(url: string) {
    this.ws = new WebSocket(url);
    this.ws.onopen = () => {
      for (const line of this.pending) this.ws.send(line);
      this.pending = [];
    };
    this.ws.onmessage = (ev) => {
      for (const line of String(ev.data).split("\n")) {
        if (line.trim() && this.lineCb) this.lineCb(line);
      }
    };
    this.ws.onclose = () => this.closeCb?.();
    this.ws.onerror = () => this.closeCb?.();
  }

  send(line: string): void {
    if (this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(line);
    } else if (this.ws.readyState === WebSocket.CONNECTING) {
      this.pending.push(line);
    }
  }

  onLine(cb: (line: string) => void): void {
    this.lineCb = cb;
  }

  onClose(cb: () => void): void {
    this.closeCb = cb;
  }

  close(): void {
    this.ws.close();
  }
}
