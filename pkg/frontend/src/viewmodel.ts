// Pure console state: a reducer over raw socket messages.  No client-side
// simulation happens here; the view is a function of the snapshots the
// server sent (replaying the same stream always yields the same state).

import { EventEntry, parseServerMessage, Snapshot } from './schema.js';

export type ConnectionStatus = 'connecting' | 'connected' | 'disconnected';

export interface TracePoint {
  x: number;
  y: number;
}

export interface ConsoleState {
  connection: ConnectionStatus;
  banner: string | null;
  snapshot: Snapshot | null;
  events: EventEntry[];
  trace: TracePoint[];
  pendingCommand: string | null; // command id awaiting its ack
  notice: string | null; // transient operator feedback (e.g. offline click)
}

export const MAX_EVENTS = 400;
export const MAX_TRACE = 2000;

export function initialState(): ConsoleState {
  return {
    connection: 'connecting',
    banner: null,
    snapshot: null,
    events: [],
    trace: [],
    pendingCommand: null,
    notice: null,
  };
}

export function setConnection(state: ConsoleState, status: ConnectionStatus): ConsoleState {
  return { ...state, connection: status, pendingCommand: null };
}

export function commandSent(state: ConsoleState, id: string): ConsoleState {
  return { ...state, pendingCommand: id, notice: null };
}

export function noticeShown(state: ConsoleState, notice: string): ConsoleState {
  return { ...state, notice };
}

function mergeEvents(existing: EventEntry[], incoming: EventEntry[]): EventEntry[] {
  const lastSeen = existing.length ? existing[existing.length - 1].i : -1;
  const fresh = incoming.filter((e) => e.i > lastSeen);
  if (!fresh.length) return existing;
  const merged = existing.concat(fresh);
  return merged.length > MAX_EVENTS ? merged.slice(merged.length - MAX_EVENTS) : merged;
}

function appendTrace(trace: TracePoint[], snapshot: Snapshot): TracePoint[] {
  const pt = { x: snapshot.pose.x, y: snapshot.pose.y };
  const last = trace.length ? trace[trace.length - 1] : null;
  if (last && last.x === pt.x && last.y === pt.y) return trace;
  const next = trace.concat(pt);
  return next.length > MAX_TRACE ? next.slice(next.length - MAX_TRACE) : next;
}

export function applyMessage(state: ConsoleState, raw: string): ConsoleState {
  const msg = parseServerMessage(raw);
  if (msg === null) {
    return { ...state, banner: 'received a message that does not match the schema' };
  }
  if (msg.type === 'ack') {
    const pending = state.pendingCommand === msg.id ? null : state.pendingCommand;
    return { ...state, pendingCommand: pending };
  }
  if (msg.type === 'error') {
    const pending = msg.id !== null && state.pendingCommand === msg.id ? null : state.pendingCommand;
    return { ...state, banner: `server error: ${msg.message}`, pendingCommand: pending };
  }
  // snapshot: discard stale ones, the view only reflects the latest
  if (state.snapshot && msg.time < state.snapshot.time) {
    return state;
  }
  return {
    ...state,
    banner: null,
    snapshot: msg,
    events: mergeEvents(state.events, msg.events.recent),
    trace: appendTrace(state.trace, msg),
  };
}

export function replay(messages: string[]): ConsoleState {
  let state = setConnection(initialState(), 'connected');
  for (const raw of messages) {
    state = applyMessage(state, raw);
  }
  return state;
}
