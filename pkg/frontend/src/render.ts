// DOM rendering: one atomic pass from ConsoleState to the panels.
// All panels read the latest snapshot only; the event log and chassis trace
// come from the accumulated reducer state.

import { GESTURES, Snapshot } from './schema.js';
import { ConsoleState } from './viewmodel.js';

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function pct(fraction: number): string {
  return `${Math.round(Math.min(Math.max(fraction, 0), 1) * 100)}%`;
}

function renderIntent(snapshot: Snapshot | null): void {
  const nameEl = el('intent-name');
  const bars = el('intent-bars');
  if (!snapshot || !snapshot.intent) {
    nameEl.textContent = 'none yet';
    bars.innerHTML = '';
    return;
  }
  const intent = snapshot.intent;
  nameEl.textContent = `${intent.name} (${(intent.confidence * 100).toFixed(1)}%)`;
  const probs = intent.probs ?? null;
  bars.innerHTML = '';
  GESTURES.slice(2).forEach((gesture, idx) => {
    const value = probs ? probs[idx] : idx === intent.class ? intent.confidence : 0;
    const row = document.createElement('div');
    row.className = 'bar-row';
    const label = document.createElement('span');
    label.textContent = gesture;
    const bar = document.createElement('div');
    bar.className = 'bar';
    const fill = document.createElement('div');
    fill.className = idx === intent.class ? 'bar-fill active' : 'bar-fill';
    fill.style.width = pct(value);
    bar.appendChild(fill);
    row.appendChild(label);
    row.appendChild(bar);
    bars.appendChild(row);
  });
}

function renderTrace(state: ConsoleState): void {
  const canvas = el<HTMLCanvasElement>('trace');
  const ctx = canvas.getContext('2d');
  if (!ctx) return;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const cx = canvas.width / 2;
  const cy = canvas.height / 2;
  const scale = 40; // px per meter

  ctx.strokeStyle = '#ccc';
  ctx.beginPath();
  ctx.moveTo(cx - 200, cy);
  ctx.lineTo(cx + 200, cy);
  ctx.moveTo(cx, cy - 200);
  ctx.lineTo(cx, cy + 200);
  ctx.stroke();

  if (state.trace.length > 1) {
    ctx.strokeStyle = '#2a7ae2';
    ctx.lineWidth = 2;
    ctx.beginPath();
    state.trace.forEach((pt, i) => {
      const px = cx + pt.x * scale;
      const py = cy - pt.y * scale;
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
    ctx.lineWidth = 1;
  }

  const snap = state.snapshot;
  if (snap) {
    const px = cx + snap.pose.x * scale;
    const py = cy - snap.pose.y * scale;
    ctx.fillStyle = '#d33';
    ctx.beginPath();
    ctx.arc(px, py, 5, 0, 2 * Math.PI);
    ctx.fill();
    ctx.strokeStyle = '#d33';
    ctx.beginPath();
    ctx.moveTo(px, py);
    ctx.lineTo(px + 12 * Math.cos(snap.pose.heading), py - 12 * Math.sin(snap.pose.heading));
    ctx.stroke();
  }
}

export function render(state: ConsoleState): void {
  const status = el('connection');
  status.textContent = state.connection;
  status.className = `status ${state.connection}`;

  const banner = el('banner');
  banner.textContent = state.banner ?? '';
  banner.style.display = state.banner ? 'block' : 'none';

  const notice = el('notice');
  notice.textContent = state.notice ?? '';
  notice.style.display = state.notice ? 'block' : 'none';

  const snap = state.snapshot;
  el('switch-stage').textContent = snap ? snap.switch.stage : '-';
  el('switch-flag').textContent = snap ? (snap.switch.flag ? 'true' : 'false') : '-';
  el('sim-time').textContent = snap ? `${snap.time.toFixed(2)} s` : '-';

  const fill = snap ? snap.recording.fill : 0;
  el('recording-fill').style.width = pct(fill);
  el('recording-label').textContent = snap
    ? `${snap.recording.frames} / ${snap.recording.target}`
    : '0 / 0';

  renderIntent(snap);

  el('executor-mode').textContent = snap ? snap.executor.mode : '-';
  el('executor-task').textContent = snap && snap.executor.response ? snap.executor.response : 'none';
  el('executor-progress-fill').style.width = pct(snap?.executor.progress ?? 0);
  el('executor-suspended').textContent =
    snap && snap.executor.suspended
      ? `${snap.executor.suspended.response} @ ${pct(snap.executor.suspended.progress)}`
      : 'empty';

  const log = el('event-log');
  log.innerHTML = '';
  for (const entry of state.events.slice(-100).reverse()) {
    const line = document.createElement('div');
    line.className = 'event-line';
    line.textContent = `${entry.t.toFixed(2)}s  ${entry.kind}  ${JSON.stringify(entry.detail)}`;
    log.appendChild(line);
  }

  renderTrace(state);

  const busy = state.pendingCommand !== null || state.connection !== 'connected';
  document.querySelectorAll<HTMLButtonElement>('button[data-gesture], #reset-btn').forEach((btn) => {
    btn.disabled = busy;
  });
}
