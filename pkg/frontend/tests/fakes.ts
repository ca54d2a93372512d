// Test doubles: a scriptable event source and a run's worth of telemetry.

import type { EventSourceLike } from '../src/api';
import type { AgentRole, EventKind, TelemetryEvent } from '../src/types';

export function makeEvent(
  seq: number,
  kind: EventKind,
  agentRole: AgentRole,
  payload: Record<string, unknown> = {},
  sceneIndex: number | null = null,
  attempt: number | null = null,
): TelemetryEvent {
  return {
    seq,
    ts: seq * 0.5,
    run_id: 'cmp-test',
    scene_index: sceneIndex,
    attempt,
    agent_role: agentRole,
    kind,
    payload,
  };
}

/** A realistic one-scene run: refine on attempt 0, commit on attempt 1. */
export function sampleRun(): TelemetryEvent[] {
  const violation = { mode: 'typographic_hallucination', frame_index: 24, detail: 'garbled in frame 24' };
  return [
    makeEvent(0, 'phase_start', 'system', { phase: 'extracting' }),
    makeEvent(1, 'phase_end', 'system', { phase: 'extracting', dna: { palette: ['#FF3D00'] } }),
    makeEvent(2, 'phase_start', 'system', { phase: 'scene', scene_index: 0, of: 1 }, 0),
    makeEvent(3, 'generation', 'generator', { frames: 24, final_digest: 'ab', corrective_iteration: 0 }, 0, 0),
    makeEvent(4, 'verdict', 'director_agent', { agent: 'director_agent', pass: true, violations: [], critique: 'ok' }, 0, 0),
    makeEvent(5, 'verdict', 'brand_safety_agent', { agent: 'brand_safety_agent', pass: false, violations: [violation], critique: 'garbled' }, 0, 0),
    makeEvent(6, 'consensus', 'orchestrator', { decision: 'refine', violations: [violation] }, 0, 0),
    makeEvent(7, 'violation_state', 'system', { active: true, violations: [violation] }, 0, 0),
    makeEvent(8, 'corrective', 'orchestrator', { base_prompt: 'p', negative_terms: ['no garbled text'], targeted_modes: ['typographic_hallucination'], iteration: 1 }, 0, 0),
    makeEvent(9, 'generation', 'generator', { frames: 24, final_digest: 'cd', corrective_iteration: 1 }, 0, 1),
    makeEvent(10, 'verdict', 'director_agent', { agent: 'director_agent', pass: true, violations: [], critique: 'ok' }, 0, 1),
    makeEvent(11, 'verdict', 'brand_safety_agent', { agent: 'brand_safety_agent', pass: true, violations: [], critique: 'ok' }, 0, 1),
    makeEvent(12, 'consensus', 'orchestrator', { decision: 'commit', violations: [] }, 0, 1),
    makeEvent(13, 'phase_end', 'system', { phase: 'scene', scene_index: 0, committed: true, retries: 1 }, 0),
  ];
}

export class FakeEventSource implements EventSourceLike {
  onmessage: ((event: { data: string }) => void) | null = null;
  onerror: ((event: unknown) => void) | null = null;
  closed = false;

  close(): void {
    this.closed = true;
  }

  deliver(event: TelemetryEvent): void {
    this.onmessage?.({ data: JSON.stringify(event) });
  }

  fail(): void {
    this.onerror?.(new Error('connection dropped'));
  }
}

/** Serves a fixed event list, honoring from_seq, one source per connect. */
export class FakeTransport {
  sources: Array<{ fromSeq: number; source: FakeEventSource }> = [];

  constructor(private readonly events: TelemetryEvent[]) {}

  connect = (fromSeq: number): FakeEventSource => {
    const source = new FakeEventSource();
    this.sources.push({ fromSeq, source });
    return source;
  };

  /** Replay [fromSeq, upTo) on the latest connection, then optionally drop it. */
  replayLatest(upTo: number, thenFail = false): void {
    const last = this.sources[this.sources.length - 1];
    if (!last) throw new Error('no connection yet');
    for (const event of this.events) {
      if (event.seq >= last.fromSeq && event.seq < upTo) last.source.deliver(event);
    }
    if (thenFail) last.source.fail();
  }
}
