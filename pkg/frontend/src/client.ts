// Websocket glue: join on open, queue everything into the view model.

import { Message, Role, join } from "./protocol";
import { ViewModel } from "./viewmodel";

export interface SessionClient {
  send(msg: Message, controlId?: string): void;
  close(): void;
}

export function connect(
  url: string,
  role: Role,
  vm: ViewModel,
  onChange: () => void,
): SessionClient {
  const ws = new WebSocket(url);
  ws.addEventListener("open", () => ws.send(JSON.stringify(join(role))));
  ws.addEventListener("message", (ev) => {
    try {
      vm.ingest(JSON.parse(String(ev.data)));
    } catch {
      return; // non-JSON frames are dropped, never rendered
    }
    onChange();
  });
  ws.addEventListener("close", () => onChange());
  return {
    send(msg: Message, controlId?: string) {
      if (controlId) {
        if (vm.isControlDisabled(controlId)) return;
        vm.markPending(controlId);
      }
      ws.send(JSON.stringify(msg));
      onChange();
    },
    close() {
      ws.close();
    },
  };
}

export function sessionUrl(loc: Location): { url: string; role: Role } {
  const params = new URLSearchParams(loc.search);
  const role = (params.get("role") ?? "participant") as Role;
  const host = params.get("server") ?? `${loc.hostname || "127.0.0.1"}:8765`;
  return { url: `ws://${host}`, role };
}
