// Console bootstrap: four components per the interface layout — the
// chase view, the aerial view, the task interface (participant only)
// and the chat panel — plus the role's control strip.

import { drawScene, fitViewport } from "./canvas";
import { connect, sessionUrl } from "./client";
import { Control, controlsFor } from "./panels";
import { chat } from "./protocol";
import { renderAerial, renderChase } from "./render";
import { ViewModel } from "./viewmodel";

function canvasCtx(id: string): CanvasRenderingContext2D {
  const el = document.getElementById(id) as HTMLCanvasElement;
  const ctx = el.getContext("2d");
  if (!ctx) throw new Error(`no 2d context for #${id}`);
  return ctx;
}

function main(): void {
  const { url, role } = sessionUrl(window.location);
  const vm = new ViewModel(role);
  const aerial = canvasCtx("aerial");
  const chase = canvasCtx("chase");
  const chatLog = document.getElementById("chat-log")!;
  const taskPane = document.getElementById("task")!;
  const controlsPane = document.getElementById("controls")!;
  const toastPane = document.getElementById("toasts")!;

  const repaint = () => {
    const now = Date.now();
    const layers = vm.layers();
    const allPoints = layers.lanes.flatMap((l) => l.points);
    drawScene(aerial, renderAerial(vm, now),
      fitViewport(allPoints, aerial.canvas.width, aerial.canvas.height));
    const v = vm.state?.vehicle;
    drawScene(chase, renderChase(vm, now), {
      scale: 6,
      offsetX: chase.canvas.width / 2 - (v ? v.x * 6 : 0),
      offsetY: chase.canvas.height / 2 - (v ? v.y * 6 : 0),
    });
    chatLog.textContent = vm.chat
      .map((c) => `[${c.t.toFixed(1)}] ${c.speaker}: ${c.text}`)
      .join("\n");
    toastPane.textContent = vm.toasts
      .slice(-5)
      .map((t) => `${t.kind}: ${t.text}`)
      .join("\n");
    if (role === "participant") {
      const view = vm.welcome?.view as Record<string, any> | undefined;
      const story = view?.story ?? "";
      const subgoals = vm.subgoalStatuses
        .map((s, i) => `  ${i + 1}. ${s}`)
        .join("\n");
      taskPane.textContent = `${story}\n${subgoals}`;
    }
    controlsPane.querySelectorAll("button").forEach((b) => {
      b.disabled = vm.isControlDisabled(b.dataset.control ?? "");
    });
  };

  const client = connect(url, role, vm, repaint);

  const addButton = (ctl: Control) => {
    const b = document.createElement("button");
    b.textContent = ctl.label;
    b.dataset.control = ctl.id;
    b.addEventListener("click", () => client.send(ctl.sample(), ctl.id));
    controlsPane.appendChild(b);
  };
  controlsFor(role)
    .filter((c) => c.id !== "chat")
    .forEach(addButton);

  // hold-to-type chat: composition start/end give the timing fields
  const input = document.getElementById("chat-input") as HTMLInputElement;
  let composeStart = 0;
  input.addEventListener("focus", () => {
    composeStart = Date.now() / 1000;
  });
  input.addEventListener("keydown", (ev) => {
    if (ev.key !== "Enter" || !input.value) return;
    const speaker = role === "co_wizard" ? "BOT" : "HUM";
    client.send(chat(speaker, input.value, composeStart, Date.now() / 1000));
    input.value = "";
    composeStart = 0;
  });

  setInterval(repaint, 500); // keeps the staleness badge honest
}

window.addEventListener("DOMContentLoaded", main);
