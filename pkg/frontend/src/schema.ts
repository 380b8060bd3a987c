// Wire types for the interaction service (protocol v1) and runtime guards.
// The console never trusts a message: anything that fails validation is
// reported as a banner, never thrown.

export const PROTOCOL_VERSION = 1;

export type SwitchStage = 'ArmsDown' | 'LeftRaised' | 'Triggered';
export type ExecutorMode = 'Idle' | 'Running' | 'Paused';

export interface EventEntry {
  i: number;
  t: number;
  kind: string;
  detail: Record<string, unknown>;
}

export interface Snapshot {
  v: number;
  type: 'snapshot';
  tick: number;
  time: number;
  switch: { stage: SwitchStage; flag: boolean };
  recording: { active: boolean; frames: number; target: number; fill: number };
  intent: {
    class: number;
    name: string;
    confidence: number;
    probs?: number[] | null;
  } | null;
  executor: {
    mode: ExecutorMode;
    response: string | null;
    progress: number | null;
    suspended: { response: string; progress: number } | null;
  };
  pose: { x: number; y: number; heading: number };
  events: { total: number; recent: EventEntry[] };
}

export interface AckMessage {
  v: number;
  type: 'ack';
  id: string;
}

export interface ErrorMessage {
  v: number;
  type: 'error';
  id: string | null;
  message: string;
}

export type ServerMessage = Snapshot | AckMessage | ErrorMessage;

export const GESTURES = [
  'raise_left_hand',
  'lower_left_hand',
  'wave_right_hand',
  'stretch_right_hand',
  'salute',
  'lift_right_arm',
  'wave_forwards',
  'wave_backwards',
  'draw_circle',
  'wave_arms_around',
] as const;

function isObject(v: unknown): v is Record<string, unknown> {
  return typeof v === 'object' && v !== null && !Array.isArray(v);
}

function isFiniteNumber(v: unknown): v is number {
  return typeof v === 'number' && Number.isFinite(v);
}

const STAGES = ['ArmsDown', 'LeftRaised', 'Triggered'];
const MODES = ['Idle', 'Running', 'Paused'];

export function validateSnapshot(msg: Record<string, unknown>): Snapshot | null {
  if (msg.v !== PROTOCOL_VERSION || msg.type !== 'snapshot') return null;
  if (!isFiniteNumber(msg.tick) || !isFiniteNumber(msg.time)) return null;

  const sw = msg.switch;
  if (!isObject(sw) || !STAGES.includes(sw.stage as string) || typeof sw.flag !== 'boolean') {
    return null;
  }

  const rec = msg.recording;
  if (
    !isObject(rec) ||
    typeof rec.active !== 'boolean' ||
    !isFiniteNumber(rec.frames) ||
    !isFiniteNumber(rec.target) ||
    !isFiniteNumber(rec.fill)
  ) {
    return null;
  }

  const intent = msg.intent;
  if (intent !== null) {
    if (
      !isObject(intent) ||
      !isFiniteNumber(intent.class) ||
      intent.class < 0 ||
      intent.class > 7 ||
      typeof intent.name !== 'string' ||
      !isFiniteNumber(intent.confidence)
    ) {
      return null;
    }
    const probs = intent.probs;
    if (probs !== undefined && probs !== null) {
      if (!Array.isArray(probs) || probs.length !== 8 || !probs.every(isFiniteNumber)) {
        return null;
      }
    }
  }

  const ex = msg.executor;
  if (!isObject(ex) || !MODES.includes(ex.mode as string)) return null;
  if (ex.response !== null && typeof ex.response !== 'string') return null;
  if (ex.progress !== null && !isFiniteNumber(ex.progress)) return null;
  if (ex.suspended !== null) {
    const sus = ex.suspended;
    if (!isObject(sus) || typeof sus.response !== 'string' || !isFiniteNumber(sus.progress)) {
      return null;
    }
  }

  const pose = msg.pose;
  if (!isObject(pose) || !isFiniteNumber(pose.x) || !isFiniteNumber(pose.y) || !isFiniteNumber(pose.heading)) {
    return null;
  }

  const events = msg.events;
  if (!isObject(events) || !isFiniteNumber(events.total) || !Array.isArray(events.recent)) {
    return null;
  }
  for (const e of events.recent) {
    if (!isObject(e) || !isFiniteNumber(e.i) || !isFiniteNumber(e.t) || typeof e.kind !== 'string' || !isObject(e.detail)) {
      return null;
    }
  }

  return msg as unknown as Snapshot;
}

export function parseServerMessage(raw: string): ServerMessage | null {
  let msg: unknown;
  try {
    msg = JSON.parse(raw);
  } catch {
    return null;
  }
  if (!isObject(msg) || msg.v !== PROTOCOL_VERSION) return null;
  if (msg.type === 'snapshot') return validateSnapshot(msg);
  if (msg.type === 'ack' && typeof msg.id === 'string') return msg as unknown as AckMessage;
  if (msg.type === 'error' && typeof msg.message === 'string') {
    return msg as unknown as ErrorMessage;
  }
  return null;
}
