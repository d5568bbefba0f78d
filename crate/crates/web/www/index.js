import init, { Demo } from "./pkg/conebeam_web.js";

const $ = (id) => document.getElementById(id);

function draw(canvas, data, n) {
  canvas.width = n;
  canvas.height = n;
  let lo = Infinity, hi = -Infinity;
  for (const v of data) { if (v < lo) lo = v; if (v > hi) hi = v; }
  const span = hi > lo ? hi - lo : 1;
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(n, n);
  // row 0 of the data is the bottom of the image
  for (let r = 0; r < n; r++) {
    for (let c = 0; c < n; c++) {
      const g = Math.round(255 * (data[r * n + c] - lo) / span);
      const o = 4 * ((n - 1 - r) * n + c);
      img.data[o] = img.data[o + 1] = img.data[o + 2] = g;
      img.data[o + 3] = 255;
    }
  }
  ctx.putImageData(img, 0, 0);
}

function timed(label, f) {
  const t0 = performance.now();
  const out = f();
  $("status").textContent = `${label}: ${(performance.now() - t0).toFixed(0)} ms`;
  return out;
}

await init();
const demo = new Demo(BigInt($("seed").value));
const nv = demo.volume_size();
const nd = demo.detector_size();

const slice = () => Number($("slice").value);
const showPhantom = () => draw($("phantom"), demo.phantom_slice(slice()), nv);
const showDrr = () => {
  $("theta-val").textContent = $("theta").value;
  draw($("drr"), timed("DRR", () => demo.drr(Number($("theta").value))), nd);
};
const showRecon = () =>
  draw($("recon"), timed("reconstruction", () =>
    demo.recon_slice(Number($("views").value), Number($("sweeps").value), slice())), nv);

$("seed").addEventListener("change", () => {
  demo.reseed(BigInt($("seed").value));
  showPhantom(); showDrr(); showRecon();
});
$("slice").addEventListener("input", () => { showPhantom(); });
$("theta").addEventListener("input", showDrr);
$("run").addEventListener("click", showRecon);

showPhantom();
showDrr();
showRecon();
