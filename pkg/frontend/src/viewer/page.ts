/** Inline browser page: canvas + key/pointer capture; all state transitions
 * happen server-side so the behavior matches the headless tests exactly.
 */

export const PAGE_HTML = `<!doctype html>
<html>
<head>
<meta charset="utf-8">
<title>lidarsplat viewer</title>
<style>
  body { margin: 0; background: #111; color: #ddd; font: 13px monospace; overflow: hidden; }
  #hud { position: fixed; top: 8px; left: 8px; background: rgba(0,0,0,.6); padding: 6px 10px;
         border-radius: 4px; white-space: pre; pointer-events: none; }
  canvas { display: block; margin: 0 auto; image-rendering: pixelated; }
</style>
</head>
<body>
<div id="hud">connecting...</div>
<canvas id="view"></canvas>
<script>
const canvas = document.getElementById('view');
const hud = document.getElementById('hud');
const ctx = canvas.getContext('2d');
const pending = [];
let dragging = false;

addEventListener('keydown', (e) => {
  if (e.key === 'p') { fetch('/api/screenshot', {method: 'POST', headers: {'content-type': 'application/json'}, body: '{}'}); return; }
  pending.push({kind: 'key', key: e.key});
});
canvas.addEventListener('mousedown', () => dragging = true);
addEventListener('mouseup', () => dragging = false);
addEventListener('mousemove', (e) => {
  if (dragging) pending.push({kind: 'drag', dx: e.movementX, dy: e.movementY});
});

let last = performance.now();
async function tick() {
  const now = performance.now();
  const dt = Math.min((now - last) / 1000, 0.2);
  last = now;
  const events = pending.splice(0);
  const state = await (await fetch('/api/input', {
    method: 'POST', headers: {'content-type': 'application/json'},
    body: JSON.stringify({events, dt}),
  })).json();
  const buf = await (await fetch('/api/frame.bin')).arrayBuffer();
  const head = new DataView(buf, 0, 8);
  const w = head.getUint32(0, true), h = head.getUint32(4, true);
  if (canvas.width !== w) { canvas.width = w; canvas.height = h; }
  ctx.putImageData(new ImageData(new Uint8ClampedArray(buf, 8), w, h), 0, 0);
  hud.textContent =
    'mode: ' + state.mode + '   fps: ' + state.fpsEma.toFixed(1) + '\\n' +
    'filter_strength: ' + state.filter.filterStrength.toPrecision(3) +
    '   levels: ' + state.filter.levels + '\\n' +
    '[w a s d q e] move  [drag] look  [ [ ] ] strength  [- +] levels  [m] mode  [p] screenshot' +
    (state.notice ? '\\n! ' + state.notice : '');
  requestAnimationFrame(tick);
}
tick();
</script>
</body>
</html>
`;
