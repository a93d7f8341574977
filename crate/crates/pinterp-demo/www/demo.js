// Plain-canvas front-end for the wasm demo. No frameworks; the wasm
// package is expected in ./pkg (wasm-pack build --target web).

import init, { convergence_curve, error_field, matched_1d } from "./pkg/pinterp_demo.js";

const status = document.getElementById("status");

function fail(msg) {
  status.textContent = msg;
  throw new Error(msg);
}

function axes(ctx, w, h, pad) {
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = "#888";
  ctx.lineWidth = 1;
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
}

function drawConvergence(data) {
  const canvas = document.getElementById("cc-canvas");
  const ctx = canvas.getContext("2d");
  const pad = 48;
  const { width: w, height: h } = canvas;
  axes(ctx, w, h, pad);

  const pts = data.points.map((r) => [Math.log(r.p), Math.log(r.error)]);
  const xs = pts.map((p) => p[0]);
  const ys = pts.map((p) => p[1]);
  const x0 = Math.min(...xs), x1 = Math.max(...xs);
  const y0 = Math.min(...ys), y1 = Math.max(...ys);
  const sx = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - y0) / (y1 - y0 || 1)) * (h - 2 * pad);

  // fitted slope over p >= 3
  const fit = pts.filter((_, i) => data.points[i].p >= 3);
  let slope = 0;
  if (fit.length >= 2) {
    const n = fit.length;
    const mx = fit.reduce((a, p) => a + p[0], 0) / n;
    const my = fit.reduce((a, p) => a + p[1], 0) / n;
    slope =
      fit.reduce((a, p) => a + (p[0] - mx) * (p[1] - my), 0) /
      fit.reduce((a, p) => a + (p[0] - mx) ** 2, 0);
    const b = my - slope * mx;
    ctx.strokeStyle = "#999";
    ctx.setLineDash([5, 4]);
    ctx.beginPath();
    ctx.moveTo(sx(x0), sy(slope * x0 + b));
    ctx.lineTo(sx(x1), sy(slope * x1 + b));
    ctx.stroke();
    ctx.setLineDash([]);
  }

  ctx.strokeStyle = "#b02a2a";
  ctx.fillStyle = "#b02a2a";
  ctx.lineWidth = 1.6;
  ctx.beginPath();
  pts.forEach((p, i) => (i ? ctx.lineTo(sx(p[0]), sy(p[1])) : ctx.moveTo(sx(p[0]), sy(p[1]))));
  ctx.stroke();
  pts.forEach((p) => {
    ctx.beginPath();
    ctx.arc(sx(p[0]), sy(p[1]), 3, 0, 7);
    ctx.fill();
  });

  // tick labels
  ctx.fillStyle = "#444";
  ctx.font = "12px sans-serif";
  data.points.forEach((r, i) => {
    if (i === 0 || r.p % 4 === 0) ctx.fillText(`p=${r.p}`, sx(pts[i][0]) - 10, h - pad + 16);
  });
  ctx.save();
  ctx.translate(14, h / 2);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText(`log ${data.label}`, -40, 0);
  ctx.restore();
  document.getElementById("cc-slope").textContent = `fitted slope (p ≥ 3): ${slope.toFixed(3)}`;
}

function drawField(data) {
  const canvas = document.getElementById("ef-canvas");
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  ctx.clearRect(0, 0, w, h);
  const n = data.n;
  const [x0, y0, x1, y1] = data.bbox;
  const cell = Math.min(w / n, h / n);
  const vmax = data.max || 1;
  const vmin = vmax * 1e-8;
  for (let j = 0; j < n; j++) {
    for (let i = 0; i < n; i++) {
      const v = data.values[j * n + i];
      if (v === null) continue;
      const t = Math.max(0, Math.min(1, Math.log(Math.max(v, vmin) / vmin) / Math.log(vmax / vmin)));
      // simple blue->yellow->red ramp
      const r = Math.round(255 * Math.min(1, 2 * t));
      const g = Math.round(255 * (t < 0.5 ? 2 * t : 2 - 2 * t));
      const b = Math.round(255 * Math.max(0, 1 - 2 * t));
      ctx.fillStyle = `rgb(${r},${g},${b})`;
      // flip y so the triangle sits upright
      ctx.fillRect(i * cell, (n - 1 - j) * cell, cell + 0.5, cell + 0.5);
    }
  }
  ctx.strokeStyle = "#222";
  ctx.strokeRect(0, 0, n * cell, n * cell);
  document.getElementById("ef-max").textContent =
    `bbox [${x0},${y0}]–[${x1},${y1.toFixed(3)}], max error ${vmax.toExponential(2)}`;
}

function drawMatched(data) {
  const canvas = document.getElementById("m1-canvas");
  const ctx = canvas.getContext("2d");
  const pad = 40;
  const { width: w, height: h } = canvas;
  axes(ctx, w, h, pad);
  const ys = data.points.flatMap((r) => [r.f, r.matched, r.projection]);
  const y0 = Math.min(...ys), y1 = Math.max(...ys);
  const sx = (x) => pad + ((x + 1) / 2) * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - y0) / (y1 - y0 || 1)) * (h - 2 * pad);
  const curve = (key, color, width) => {
    ctx.strokeStyle = color;
    ctx.lineWidth = width;
    ctx.beginPath();
    data.points.forEach((r, i) =>
      i ? ctx.lineTo(sx(r.x), sy(r[key])) : ctx.moveTo(sx(r.x), sy(r[key]))
    );
    ctx.stroke();
  };
  curve("f", "#111", 2.2);
  curve("projection", "#2255bb", 1.4);
  curve("matched", "#b02a2a", 1.4);
  const [wm, wp] = data.endpoint_weights;
  document.getElementById("m1-w").textContent =
    `endpoint corrections: ${wm.toExponential(2)} at -1, ${wp.toExponential(2)} at +1`;
}

function hook(id, fn) {
  document.getElementById(id).addEventListener("click", fn);
}

async function main() {
  try {
    await init();
  } catch (e) {
    fail(`failed to load wasm package (build it with wasm-pack, see README): ${e}`);
  }
  const parse = (s) => {
    const v = JSON.parse(s);
    if (v.error) fail(v.error);
    return v;
  };

  const runCurve = () =>
    drawConvergence(
      parse(
        convergence_curve(
          document.getElementById("cc-op").value,
          document.getElementById("cc-field").value,
          parseFloat(document.getElementById("cc-alpha").value),
          parseInt(document.getElementById("cc-pmax").value)
        )
      )
    );
  const runField = () =>
    drawField(
      parse(
        error_field(
          parseInt(document.getElementById("ef-p").value),
          parseFloat(document.getElementById("ef-alpha").value),
          120
        )
      )
    );
  const runMatched = () =>
    drawMatched(
      parse(
        matched_1d(
          document.getElementById("m1-f").value,
          parseInt(document.getElementById("m1-p").value),
          400
        )
      )
    );

  hook("cc-run", runCurve);
  hook("ef-run", runField);
  hook("m1-run", runMatched);
  runCurve();
  runField();
  runMatched();
}

main();
