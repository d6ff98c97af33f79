// Thin adapter from draw ops to a 2D canvas context.

import { DrawOp } from "./render";

export interface Viewport {
  // world -> canvas transform
  scale: number;
  offsetX: number;
  offsetY: number;
}

export function fitViewport(
  points: [number, number][],
  width: number,
  height: number,
  margin = 20,
): Viewport {
  if (points.length === 0) return { scale: 1, offsetX: 0, offsetY: 0 };
  let minX = Infinity, minY = Infinity, maxX = -Infinity, maxY = -Infinity;
  for (const [x, y] of points) {
    minX = Math.min(minX, x);
    minY = Math.min(minY, y);
    maxX = Math.max(maxX, x);
    maxY = Math.max(maxY, y);
  }
  const spanX = Math.max(1, maxX - minX);
  const spanY = Math.max(1, maxY - minY);
  const scale = Math.min(
    (width - 2 * margin) / spanX,
    (height - 2 * margin) / spanY,
  );
  return {
    scale,
    offsetX: margin - minX * scale,
    offsetY: margin - minY * scale,
  };
}

export function drawScene(
  ctx: CanvasRenderingContext2D,
  ops: DrawOp[],
  vp: Viewport,
): void {
  const tx = (x: number) => x * vp.scale + vp.offsetX;
  const ty = (y: number) => y * vp.scale + vp.offsetY;
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  let badgeY = 16;
  for (const op of ops) {
    switch (op.op) {
      case "polyline": {
        ctx.strokeStyle = op.color;
        ctx.lineWidth = op.width;
        ctx.beginPath();
        op.points.forEach(([x, y], i) =>
          i === 0 ? ctx.moveTo(tx(x), ty(y)) : ctx.lineTo(tx(x), ty(y)),
        );
        ctx.stroke();
        break;
      }
      case "circle":
        ctx.fillStyle = op.color;
        ctx.beginPath();
        ctx.arc(tx(op.x), ty(op.y), op.r, 0, 2 * Math.PI);
        ctx.fill();
        if (op.label) {
          ctx.fillStyle = "#333";
          ctx.font = "10px sans-serif";
          ctx.fillText(op.label, tx(op.x) + op.r + 2, ty(op.y));
        }
        break;
      case "vehicle": {
        const x = tx(op.x);
        const y = ty(op.y);
        const a = (op.yaw * Math.PI) / 180;
        ctx.fillStyle = "#111";
        ctx.beginPath();
        ctx.moveTo(x + 8 * Math.cos(a), y + 8 * Math.sin(a));
        ctx.lineTo(x + 5 * Math.cos(a + 2.5), y + 5 * Math.sin(a + 2.5));
        ctx.lineTo(x + 5 * Math.cos(a - 2.5), y + 5 * Math.sin(a - 2.5));
        ctx.closePath();
        ctx.fill();
        break;
      }
      case "tint":
        ctx.fillStyle = op.color;
        ctx.fillRect(0, 0, ctx.canvas.width, ctx.canvas.height);
        break;
      case "badge":
        ctx.fillStyle = "#c0392b";
        ctx.font = "bold 12px sans-serif";
        ctx.fillText(op.text, 8, badgeY);
        badgeY += 16;
        break;
    }
  }
}
