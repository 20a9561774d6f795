/** Test scaffolding: a scripted transport that logs every outbound call
 * (the UI's only channel), and an in-memory Storage. The response
 * payloads in fixtures.json were captured verbatim from the engine's
 * gateway, so the shapes the UI is tested against are the real wire.
 */
import type { RpcTransport } from "../src/rpc.js";

export interface LoggedCall {
  method: string;
  params: Record<string, unknown>;
}

export interface Scripted {
  transport: RpcTransport;
  calls: LoggedCall[];
}

export function scripted(
  handlers: Record<string, (params: Record<string, unknown>) => unknown>,
): Scripted {
  const calls: LoggedCall[] = [];
  const transport: RpcTransport = async (method, params) => {
    calls.push({ method, params: params as Record<string, unknown> });
    const handler = handlers[method];
    if (!handler) {
      throw new Error(`test transport: unscripted method ${method}`);
    }
    return handler(params as Record<string, unknown>);
  };
  return { transport, calls };
}

export class MemoryStorage implements Storage {
  private items = new Map<string, string>();

  get length(): number {
    return this.items.size;
  }

  clear(): void {
    this.items.clear();
  }

  getItem(key: string): string | null {
    return this.items.has(key) ? (this.items.get(key) as string) : null;
  }

  key(index: number): string | null {
    return [...this.items.keys()][index] ?? null;
  }

  removeItem(key: string): void {
    this.items.delete(key);
  }

  setItem(key: string, value: string): void {
    this.items.set(key, value);
  }
}
