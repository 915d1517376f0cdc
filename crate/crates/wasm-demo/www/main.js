import init, { bondCurves, survivalCurves, trancheCurves } from "./pkg/tng_wasm.js";

const COLORS = ["#1f5fa8", "#999", "#c0392b"];

function plot(section, x, series, names) {
  const canvas = section.querySelector("canvas");
  const ctx = canvas.getContext("2d");
  const pad = 40;
  const w = canvas.width - 2 * pad;
  const h = canvas.height - 2 * pad;
  ctx.clearRect(0, 0, canvas.width, canvas.height);

  const ys = series.flatMap((s) => Array.from(s));
  const ymin = Math.min(0, ...ys);
  const ymax = Math.max(...ys) || 1;
  const xmin = x[0];
  const xmax = x[x.length - 1];
  const px = (v) => pad + ((v - xmin) / (xmax - xmin)) * w;
  const py = (v) => pad + h - ((v - ymin) / (ymax - ymin)) * h;

  ctx.strokeStyle = "#444";
  ctx.strokeRect(pad, pad, w, h);
  ctx.fillStyle = "#444";
  ctx.fillText(xmin.toPrecision(3), pad, pad + h + 15);
  ctx.fillText(xmax.toPrecision(3), pad + w - 25, pad + h + 15);
  ctx.fillText(ymax.toPrecision(3), 2, pad + 4);
  ctx.fillText(ymin.toPrecision(3), 2, pad + h);

  series.forEach((s, k) => {
    ctx.strokeStyle = COLORS[k % COLORS.length];
    ctx.beginPath();
    s.forEach((v, i) => (i === 0 ? ctx.moveTo(px(x[i]), py(v)) : ctx.lineTo(px(x[i]), py(v))));
    ctx.stroke();
  });

  section.querySelector(".legend").innerHTML = names
    .map((n, k) => `<span style="color:${COLORS[k % COLORS.length]}">■ ${n}</span>`)
    .join("");
}

function inputs(section) {
  const v = {};
  section.querySelectorAll("input").forEach((el) => {
    v[el.name] = el.type === "checkbox" ? el.checked : Number(el.value);
  });
  return v;
}

function wire(id, draw) {
  const section = document.getElementById(id);
  const run = () => {
    try {
      draw(section, inputs(section));
    } catch (e) {
      section.querySelector(".legend").innerHTML = `<span class="error">${e.message ?? e}</span>`;
    }
  };
  section.querySelectorAll("input").forEach((el) => el.addEventListener("change", run));
  run();
}

await init();

wire("bond", (s, v) => {
  const c = bondCurves(v.face, v.maturity, v.rate, v.sigma, 200);
  // spread is on a different scale: draw it rescaled to the price axis
  const price = c.series(0);
  const spread = c.series(2);
  const top = Math.max(...price);
  const smax = Math.max(...spread) || 1;
  plot(s, c.x(), [price, c.series(1), spread.map((x) => (x / smax) * top)], [
    "price",
    "riskless value",
    `credit spread (peak ${(smax * 1e4).toFixed(0)} bp)`,
  ]);
});

wire("survival", (s, v) => {
  const c = survivalCurves(v.beta, v.gamma, v.paths, v.steps, v.seed, v.bridge);
  plot(s, c.x(), [c.series(0), c.series(1)], ["simulated", "closed form"]);
});

wire("tranche", (s, v) => {
  const c = trancheCurves(v.beta, v.recovery, v.paths, v.seed, 12);
  plot(s, c.x(), [c.series(0), c.series(1), c.series(2)], ["equity", "mezzanine", "senior"]);
});
