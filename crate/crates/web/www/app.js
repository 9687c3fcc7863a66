import init, { certificate, schedule, simulate, greedy_steps } from "./pkg/bicrit_web.js";

const PRESETS = {
  scaling: {
    instance: {
      ground: { n: 8, labels: ["near", "full", "p1", "p2", "p3", "p4", "p5", "p6"] },
      objective: { kind: "modular", payload: { costs: [0.5, 1, 100, 100, 100, 100, 100, 100] } },
      constraint: {
        kind: "weighted-coverage",
        payload: { weights: [975000, 25000, 1, 1, 1, 1, 1, 1], covers: [[0], [0, 1], [2], [3], [4], [5], [6], [7]] },
      },
    },
    offline: { problem: "SC", kappa: 1000000, omega: 50000 },
  },
  sc: {
    instance: {
      ground: { n: 3, labels: ["a", "b", "c"] },
      objective: { kind: "modular", payload: { costs: [1, 1, 3] } },
      constraint: { kind: "coverage", payload: { universe: 2, covers: [[0], [1], [0, 1]] } },
      h: 5,
    },
    offline: { problem: "SC", kappa: 2, omega: 0.5 },
  },
  fsm: {
    instance: {
      ground: { n: 4, labels: ["a", "b", "c", "d"] },
      objective: { kind: "coverage", payload: { universe: 3, covers: [[0, 1], [0], [2], [1, 2]] } },
      constraint: { kind: "modular", payload: { costs: [1, 1, 1, 1] } },
    },
    offline: {
      problem: "FSM", kappa: 2, omega: 0.5,
      fairness: { groups: [0, 0, 1, 1], lower: [0, 0], upper: [1, 1] },
    },
  },
};

const $ = (id) => document.getElementById(id);
const scenario = () => JSON.stringify(PRESETS[$("preset").value]);

function fail(el, e) {
  el.innerHTML = `<p class="err">${String(e)}</p>`;
}

// Draws series of [x, y] points on shared axes; `logX` plots log2(x).
function plot(canvas, series, { logX = false, xLabel = "", yLabel = "" } = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, pad = 50;
  ctx.clearRect(0, 0, W, H);
  const fx = (x) => (logX ? Math.log2(x) : x);
  const pts = series.flatMap((s) => s.points);
  if (pts.length === 0) return;
  let [x0, x1] = [Math.min(...pts.map((p) => fx(p[0]))), Math.max(...pts.map((p) => fx(p[0])))];
  let [y0, y1] = [Math.min(0, ...pts.map((p) => p[1])), Math.max(0, ...pts.map((p) => p[1]))];
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) y1 = y0 + 1;
  const X = (x) => pad + ((fx(x) - x0) / (x1 - x0)) * (W - 2 * pad);
  const Y = (y) => H - pad + (-(y - y0) / (y1 - y0)) * (H - 2 * pad);

  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(pad, Y(0)); ctx.lineTo(W - pad, Y(0));
  ctx.moveTo(pad, pad); ctx.lineTo(pad, H - pad);
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.font = "12px sans-serif";
  ctx.fillText(y1.toPrecision(3), 4, pad);
  ctx.fillText(y0.toPrecision(3), 4, H - pad);
  ctx.fillText(xLabel, W / 2, H - 12);
  ctx.fillText(yLabel, 4, 16);

  series.forEach((s, i) => {
    ctx.strokeStyle = s.color;
    ctx.beginPath();
    s.points.forEach(([x, y], j) => (j ? ctx.lineTo(X(x), Y(y)) : ctx.moveTo(X(x), Y(y))));
    ctx.stroke();
    ctx.fillStyle = s.color;
    ctx.fillText(s.name, W - pad - 140, pad + 16 * i);
  });
}

function certify() {
  const r = JSON.parse(certificate(scenario()));
  return { ...r.cert, h: r.h };
}

function runSchedule() {
  const out = $("sched-out");
  try {
    const c = certify();
    const pts = JSON.parse(schedule(c.delta, c.n_calls, c.h, Number($("sched-t").value)));
    plot($("sched-canvas"), [
      { name: "exploration share", color: "#c33", points: pts.map((p) => [p.horizon, p.explore_share]) },
      { name: "rad / h", color: "#36c", points: pts.map((p) => [p.horizon, p.rad / c.h]) },
    ], { logX: true, xLabel: "log2 T" });
    const rows = pts.map((p) => `<tr><td>${p.horizon}</td><td>${p.m}</td><td>${p.rad.toFixed(4)}</td><td>${(100 * p.explore_share).toFixed(1)}%</td></tr>`);
    out.innerHTML = `<p>&alpha; = ${c.alpha.toFixed(3)}, &beta; = ${c.beta.toFixed(3)}, &delta; = ${c.delta.toPrecision(4)}, N = ${c.n_calls}</p>
      <table><tr><th>T</th><th>m</th><th>rad</th><th>explore</th></tr>${rows.join("")}</table>`;
  } catch (e) {
    fail(out, e);
  }
}

function runSimulation() {
  const out = $("sim-out");
  try {
    const s = JSON.parse(simulate(scenario(), Number($("sim-t").value), Number($("sim-seed").value), Number($("sim-m").value)));
    plot($("sim-canvas"), [
      { name: "regret", color: "#c33", points: s.curve.map(([t, r]) => [t, r]) },
      { name: "constraint violation", color: "#36c", points: s.curve.map(([t, , v]) => [t, v]) },
    ], { xLabel: "round t" });
    const last = s.curve[s.curve.length - 1];
    out.textContent = [
      `m = ${s.m}, explore rounds = ${s.explore_rounds}${s.budget_exhausted ? " (budget exhausted)" : ""}`,
      `queries: ${s.queries.join(" ")}`,
      `committed ${s.committed}, optimum ${s.opt_set}`,
      `final regret ${last[1].toPrecision(4)}, violation ${last[2].toPrecision(4)}, reference bound ${s.bound.toPrecision(4)}`,
      ...s.warnings.map((w) => `warning: ${w}`),
    ].join("\n");
  } catch (e) {
    out.textContent = "";
    fail($("sim-out"), e);
  }
}

function runGreedy() {
  const out = $("gr-out");
  try {
    const r = JSON.parse(greedy_steps(scenario(), Number($("gr-eps").value), $("gr-mode").value, 0));
    const rows = r.steps.map((s, i) =>
      `<tr><td>${i}</td><td style="text-align:left">${s.set}</td><td>${s.f.toPrecision(5)}</td><td>${s.g.toPrecision(5)}</td><td>${s.seen.toPrecision(5)}</td></tr>`);
    out.innerHTML = `<table><tr><th>step</th><th>set</th><th>f</th><th>g</th><th>oracle saw</th></tr>${rows.join("")}</table>
      <p>${r.queries} distinct oracle queries (certificate allows ${r.n_calls})</p>`;
  } catch (e) {
    fail(out, e);
  }
}

await init();
$("sched-go").onclick = runSchedule;
$("sim-go").onclick = runSimulation;
$("gr-go").onclick = runGreedy;
$("preset").onchange = () => {
  runSchedule();
  $("sim-out").textContent = "";
  $("gr-out").innerHTML = "";
};
runSchedule();
