import init, { gyro_orbit, gyro_radius, deflection_curve, deposition_profile } from "./pkg/sputtersim_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

// interleaved [x0, y0, x1, y1, ...] to point pairs
function pairs(flat) {
  const out = [];
  for (let i = 0; i + 1 < flat.length; i += 2) out.push([flat[i], flat[i + 1]]);
  return out;
}

// Line plot with axes. `series` is a list of {points, color, dots}.
function plot(canvas, series, opts = {}) {
  const ctx = canvas.getContext("2d");
  const w = canvas.width, h = canvas.height, pad = 44;
  ctx.clearRect(0, 0, w, h);
  const all = series.flatMap((s) => s.points);
  if (all.length === 0) return;
  let [x0, x1] = opts.x ?? [Math.min(...all.map((p) => p[0])), Math.max(...all.map((p) => p[0]))];
  let [y0, y1] = opts.y ?? [Math.min(...all.map((p) => p[1])), Math.max(...all.map((p) => p[1]))];
  if (opts.square) {
    const half = Math.max(x1 - x0, y1 - y0) / 2, cx = (x0 + x1) / 2, cy = (y0 + y1) / 2;
    [x0, x1, y0, y1] = [cx - half, cx + half, cy - half, cy + half];
  }
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) y1 = y0 + 1;
  const sx = (x) => pad + ((x - x0) / (x1 - x0)) * (w - 1.5 * pad);
  const sy = (y) => h - pad + ((y - y0) / (y1 - y0)) * -(h - 1.5 * pad);

  ctx.strokeStyle = "#888";
  ctx.fillStyle = "#444";
  ctx.font = "12px sans-serif";
  ctx.beginPath();
  ctx.moveTo(pad, h - pad);
  ctx.lineTo(w - pad / 2, h - pad);
  ctx.moveTo(pad, h - pad);
  ctx.lineTo(pad, pad / 2);
  ctx.stroke();
  for (const t of [0, 0.5, 1]) {
    const xv = x0 + t * (x1 - x0), yv = y0 + t * (y1 - y0);
    ctx.fillText(xv.toPrecision(3), sx(xv) - 12, h - pad + 16);
    ctx.fillText(yv.toPrecision(3), 2, sy(yv) + 4);
  }
  if (opts.xlabel) ctx.fillText(opts.xlabel, w / 2 - 20, h - 6);
  if (opts.ylabel) ctx.fillText(opts.ylabel, pad + 4, pad / 2 - 4);

  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.fillStyle = s.color;
    ctx.beginPath();
    s.points.forEach(([x, y], i) => (i ? ctx.lineTo(sx(x), sy(y)) : ctx.moveTo(sx(x), sy(y))));
    ctx.stroke();
    if (s.dots) for (const [x, y] of s.points) ctx.fillRect(sx(x) - 2, sy(y) - 2, 4, 4);
  }
}

function guarded(outId, f) {
  return () => {
    const out = $(outId);
    out.className = "out";
    try {
      f(out);
    } catch (e) {
      out.className = "out err";
      out.textContent = String(e);
    }
  };
}

const runOrbit = guarded("o-out", (out) => {
  const b = num("o-b") * 1e-3, e = num("o-e");
  const pts = pairs(gyro_orbit(b, e, num("o-n"), 3, num("o-t"))).map(([x, y]) => [x * 1e3, y * 1e3]);
  const r = gyro_radius(b, e) * 1e3;
  const circle = Array.from({ length: 181 }, (_, i) => {
    const a = (i / 180) * 2 * Math.PI;
    return [r * Math.sin(a), r - r * Math.cos(a)];
  });
  plot($("o-plot"), [{ points: circle, color: "#bbb" }, { points: pts, color: "#c33", dots: true }], {
    square: true,
    xlabel: "x (mm)",
    ylabel: "y (mm)",
  });
  const cy = pts.reduce((s, p) => s + p[1], 0) / pts.length;
  const rNum = Math.max(...pts.map(([x, y]) => Math.hypot(x, y - cy)));
  out.textContent = `Larmor radius ${r.toPrecision(5)} mm, pushed orbit ${rNum.toPrecision(5)} mm (three turns, ${pts.length - 1} steps)`;
});

const runDeflection = guarded("d-out", (out) => {
  const pts = pairs(deflection_curve($("d-pot").value, num("d-e"), 200));
  plot($("d-plot"), [{ points: pts, color: "#2363a8" }], { xlabel: "impact parameter (Å)", ylabel: "χ (rad)" });
  const min = pts.reduce((a, p) => (p[1] < a[1] ? p : a));
  out.textContent =
    min[1] < 0
      ? `rainbow: deepest attraction χ = ${min[1].toFixed(3)} rad at ρ = ${min[0].toFixed(2)} Å`
      : `purely repulsive at this energy, χ(ρ→0) = ${pts[0][1].toFixed(3)} rad`;
});

const runDeposition = guarded("p-out", (out) => {
  const t0 = performance.now();
  const gas = pairs(deposition_profile(num("p-p"), num("p-n"), num("p-s")));
  const vac = pairs(deposition_profile(0, num("p-n"), num("p-s")));
  const ms = performance.now() - t0;
  plot(
    $("p-plot"),
    [
      { points: vac, color: "#999", dots: true },
      { points: gas, color: "#1a7f37", dots: true },
    ],
    { y: [0, 1.05], xlabel: "substrate radius (mm)", ylabel: "relative thickness" },
  );
  const edge = (p) => p[p.length - 1][1].toFixed(2);
  out.textContent = `edge/peak: ${edge(gas)} at ${num("p-p")} Pa (green), ${edge(vac)} in vacuum (grey); ${ms.toFixed(0)} ms`;
});

await init();
$("o-run").onclick = runOrbit;
$("d-run").onclick = runDeflection;
$("p-run").onclick = runDeposition;
runOrbit();
runDeflection();
