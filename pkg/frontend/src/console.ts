// Console model: folds the telemetry stream into render state. Pure logic,
// no DOM — every ConsoleLine maps 1:1 to a telemetry event, ordered by seq.

import type { ConsoleLine, EventKind, Severity, TelemetryEvent } from './types';

export interface SceneCard {
  sceneIndex: number;
  attempts: number;
  alert: boolean; // violation state active until the next commit
  committed: boolean | null;
  violations: string[];
}

export interface ConsoleState {
  lines: ConsoleLine[];
  scenes: Map<number, SceneCard>;
  lastSeq: number;
}

export function newConsoleState(): ConsoleState {
  return { lines: [], scenes: new Map(), lastSeq: -1 };
}

const KIND_SEVERITY: Partial<Record<EventKind, Severity>> = {
  violation_state: 'violation',
  fault: 'violation',
  corrective: 'critique',
  repair: 'critique',
};

function describe(event: TelemetryEvent): string {
  const payload = event.payload as Record<string, any>;
  switch (event.kind) {
    case 'phase_start':
      return payload.phase === 'scene'
        ? `scene ${payload.scene_index + 1}/${payload.of} started`
        : `phase ${payload.phase} started`;
    case 'phase_end':
      return payload.phase === 'scene'
        ? `scene ${payload.scene_index + 1} ${payload.committed ? 'committed' : 'failed'} after ${payload.retries} retr${payload.retries === 1 ? 'y' : 'ies'}`
        : `phase ${payload.phase} finished`;
    case 'generation':
      return payload.asset_id !== undefined
        ? `reference asset ${payload.asset_id} normalized`
        : `attempt ${event.attempt}: generated ${payload.frames} frames`;
    case 'verdict': {
      const verdict = payload as { pass: boolean; critique: string };
      return verdict.pass ? `pass — ${verdict.critique}` : `FAIL — ${verdict.critique}`;
    }
    case 'consensus':
      return payload.decision === 'commit'
        ? 'consensus: commit'
        : `consensus: refine (${(payload.violations as unknown[]).length} violation(s))`;
    case 'corrective':
      return `corrective #${payload.iteration}: ${(payload.negative_terms as string[]).join('; ')}`;
    case 'violation_state':
      return `VIOLATION STATE: ${(payload.violations as Array<{ mode: string; frame_index: number }>)
        .map((violation) => `${violation.mode}@frame ${violation.frame_index}`)
        .join(', ')}`;
    case 'repair':
      return `structured output repaired (attempt ${payload.attempt})`;
    case 'fault':
      return `fault: ${payload.reason ?? payload.detail ?? 'unknown'}`;
  }
}

function severityOf(event: TelemetryEvent): Severity {
  if (event.kind === 'verdict' && (event.payload as { pass?: boolean }).pass === false) {
    return 'critique';
  }
  return KIND_SEVERITY[event.kind] ?? 'info';
}

export function toConsoleLine(event: TelemetryEvent): ConsoleLine {
  return {
    seq: event.seq,
    agent_role: event.agent_role,
    kind: event.kind,
    text: describe(event),
    severity: severityOf(event),
    scene_index: event.scene_index,
    attempt: event.attempt,
  };
}

function scene(state: ConsoleState, index: number): SceneCard {
  let card = state.scenes.get(index);
  if (!card) {
    card = { sceneIndex: index, attempts: 0, alert: false, committed: null, violations: [] };
    state.scenes.set(index, card);
  }
  return card;
}

/** Fold one event into the state. Duplicate or stale events (seq <= lastSeq)
 *  are ignored so a replayed reconnect can never double-render. */
export function ingest(state: ConsoleState, event: TelemetryEvent): boolean {
  if (event.seq <= state.lastSeq) return false;
  state.lastSeq = event.seq;
  state.lines.push(toConsoleLine(event));

  if (event.scene_index !== null && event.scene_index >= 0) {
    const card = scene(state, event.scene_index);
    const payload = event.payload as Record<string, any>;
    switch (event.kind) {
      case 'generation':
        card.attempts = Math.max(card.attempts, (event.attempt ?? 0) + 1);
        break;
      case 'violation_state':
        card.alert = true;
        card.violations = (payload.violations as Array<{ mode: string }>).map((v) => v.mode);
        break;
      case 'consensus':
        if (payload.decision === 'commit') {
          card.alert = false; // alert holds only until the next commit
        }
        break;
      case 'phase_end':
        if (payload.phase === 'scene') {
          card.committed = Boolean(payload.committed);
          if (card.committed) card.alert = false;
        }
        break;
    }
  }
  return true;
}

export function ingestAll(state: ConsoleState, events: TelemetryEvent[]): void {
  for (const event of events) ingest(state, event);
}

/** Render-equality key used by tests: a disconnected/resumed session must
 *  produce exactly the same fingerprint as an uninterrupted one. */
export function fingerprint(state: ConsoleState): string {
  const scenes = [...state.scenes.values()].sort((a, b) => a.sceneIndex - b.sceneIndex);
  return JSON.stringify({ lines: state.lines, scenes });
}
