import init, { fringe, rabi, surface } from "./pkg/qdc_web.js";

const COLORS = ["#36c", "#c33", "#393", "#a6a"];

function axes(ctx, w, h, pad) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(pad, pad);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad, h - pad);
  ctx.stroke();
  ctx.fillStyle = "#666";
  ctx.fillText("1", 8, pad + 4);
  ctx.fillText("0", 8, h - pad + 4);
}

// Plots series of [x, y] with y in [0, 1].
function plot(canvas, series, xmax) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 30;
  const sx = (x) => pad + (x / xmax) * (w - 2 * pad);
  const sy = (y) => h - pad - y * (h - 2 * pad);
  axes(ctx, w, h, pad);
  ctx.fillText(xmax.toFixed(2), w - pad - 10, h - 10);
  for (const s of series) {
    ctx.strokeStyle = ctx.fillStyle = s.color;
    if (s.dots) {
      s.x.forEach((x, i) => {
        ctx.beginPath();
        ctx.arc(sx(x), sy(s.y[i]), 3, 0, 2 * Math.PI);
        ctx.fill();
      });
    } else {
      ctx.beginPath();
      s.x.forEach((x, i) => (i ? ctx.lineTo(sx(x), sy(s.y[i])) : ctx.moveTo(sx(x), sy(s.y[i]))));
      ctx.stroke();
    }
  }
}

function runFringe() {
  const status = document.getElementById("fringe-status");
  status.textContent = "running...";
  // Let the status paint before the blocking call.
  setTimeout(() => {
    try {
      const alpha = parseFloat(document.getElementById("fringe-alpha").value);
      const f = fringe(
        document.getElementById("fringe-preset").value,
        alpha,
        document.getElementById("fringe-gated").checked,
        parseInt(document.getElementById("fringe-points").value, 10),
      );
      const phi = f.phi;
      plot(document.getElementById("fringe-plot"), [
        { x: phi, y: f.analytic, color: COLORS[0] },
        { x: phi, y: f.pe, color: COLORS[1], dots: true },
      ], 2 * Math.PI);
      status.textContent = `visibility ${f.visibility.toFixed(3)}`;
      f.free();
    } catch (e) {
      status.textContent = String(e);
    }
  }, 10);
}

function runRabi() {
  const ratio = parseFloat(document.getElementById("rabi-ratio").value);
  document.getElementById("rabi-ratio-value").textContent = ratio.toFixed(2);
  const chi = 10;
  const omega2 = ratio * chi;
  const r = rabi(omega2, Math.PI / omega2, 3);
  const t = r.t;
  const series = [];
  for (let n = 0; n < r.levels; n++) {
    series.push({ x: t, y: r.level(n), color: COLORS[n] });
  }
  plot(document.getElementById("rabi-plot"), series, t[t.length - 1]);
  document.getElementById("rabi-legend").innerHTML = series
    .map((s, n) => `<span style="color:${s.color}">&#8212; start |g,${n}&#x27E9;</span>`)
    .join("");
  r.free();
}

function drawSurface() {
  const canvas = document.getElementById("surface-plot");
  const ctx = canvas.getContext("2d");
  const rows = 33;
  const cols = 81;
  const pe = surface(rows, cols);
  const cw = canvas.width / cols;
  const ch = canvas.height / rows;
  for (let i = 0; i < rows; i++) {
    for (let j = 0; j < cols; j++) {
      const v = pe[i * cols + j];
      ctx.fillStyle = `rgb(${Math.round(255 * v)}, ${Math.round(80 + 80 * v)}, ${Math.round(255 * (1 - v))})`;
      ctx.fillRect(j * cw, i * ch, cw + 1, ch + 1);
    }
  }
}

await init();
document.getElementById("fringe-run").addEventListener("click", runFringe);
document.getElementById("rabi-ratio").addEventListener("change", runRabi);
drawSurface();
runRabi();
