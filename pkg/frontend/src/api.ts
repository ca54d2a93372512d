// Typed client for the campaign service. The UI talks only to the
// documented HTTP API; the event stream resumes from the last seen seq
// after any transport drop, so renders are identical to an uninterrupted
// session.

import type { CampaignForm, CampaignStatus, TelemetryEvent } from './types';
import type { FieldErrors } from './validate';

export type SubmitResult =
  | { ok: true; campaignId: string }
  | { ok: false; kind: 'invalid'; errors: FieldErrors }
  | { ok: false; kind: 'busy' }
  | { ok: false; kind: 'error'; status: number };

type FetchFn = typeof fetch;

function formBody(form: CampaignForm): Record<string, unknown> {
  const body: Record<string, unknown> = {
    url: form.url,
    objective: form.objective,
    n_scenes: form.n_scenes,
    policy: { retry_budget: form.retry_budget, consensus: 'strict_and' },
    backend_profile: form.backend_profile,
  };
  if (form.seed !== undefined) body.seed = form.seed;
  return body;
}

export async function submitCampaign(form: CampaignForm, fetchFn: FetchFn = fetch): Promise<SubmitResult> {
  const response = await fetchFn('/v1/campaigns', {
    method: 'POST',
    headers: { 'content-type': 'application/json' },
    body: JSON.stringify(formBody(form)),
  });
  if (response.status === 202) {
    const payload = (await response.json()) as { campaign_id: string };
    return { ok: true, campaignId: payload.campaign_id };
  }
  if (response.status === 422) {
    const payload = (await response.json()) as { detail: Array<{ loc: unknown[]; msg: string }> };
    const errors: FieldErrors = {};
    for (const item of payload.detail ?? []) {
      const field = String(item.loc[item.loc.length - 1] ?? 'form');
      errors[field] = item.msg;
    }
    return { ok: false, kind: 'invalid', errors };
  }
  if (response.status === 503) {
    return { ok: false, kind: 'busy' };
  }
  return { ok: false, kind: 'error', status: response.status };
}

export async function getStatus(campaignId: string, fetchFn: FetchFn = fetch): Promise<CampaignStatus> {
  const response = await fetchFn(`/v1/campaigns/${campaignId}`);
  if (!response.ok) throw new Error(`status ${response.status}`);
  return (await response.json()) as CampaignStatus;
}

export async function getResult(campaignId: string, fetchFn: FetchFn = fetch): Promise<Record<string, unknown>> {
  const response = await fetchFn(`/v1/campaigns/${campaignId}/result`);
  if (!response.ok) throw new Error(`status ${response.status}`);
  return (await response.json()) as Record<string, unknown>;
}

export async function abortCampaign(campaignId: string, fetchFn: FetchFn = fetch): Promise<boolean> {
  const response = await fetchFn(`/v1/campaigns/${campaignId}/abort`, { method: 'POST' });
  return response.ok;
}

// -- resumable event stream --------------------------------------------------

export interface EventSourceLike {
  onmessage: ((event: { data: string }) => void) | null;
  onerror: ((event: unknown) => void) | null;
  close(): void;
}

export type ConnectFn = (fromSeq: number) => EventSourceLike;

export interface StreamHandlers {
  onEvent: (event: TelemetryEvent) => void;
  onReconnect?: (fromSeq: number) => void;
}

export function defaultConnect(campaignId: string): ConnectFn {
  return (fromSeq) => {
    const source = new EventSource(`/v1/campaigns/${campaignId}/events?from_seq=${fromSeq}`);
    const like: EventSourceLike = {
      onmessage: null,
      onerror: null,
      close: () => source.close(),
    };
    source.onmessage = (message) => like.onmessage?.({ data: message.data as string });
    source.onerror = (error) => like.onerror?.(error);
    return like;
  };
}

export class ResumableEventStream {
  private nextSeq = 0;
  private source: EventSourceLike | null = null;
  private stopped = false;
  private reconnectTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly connect: ConnectFn,
    private readonly handlers: StreamHandlers,
    private readonly reconnectDelayMs = 250,
  ) {}

  start(fromSeq = 0): void {
    this.nextSeq = fromSeq;
    this.stopped = false;
    this.open();
  }

  stop(): void {
    this.stopped = true;
    if (this.reconnectTimer !== null) clearTimeout(this.reconnectTimer);
    this.source?.close();
    this.source = null;
  }

  get lastDeliveredSeq(): number {
    return this.nextSeq - 1;
  }

  private open(): void {
    this.source = this.connect(this.nextSeq);
    this.source.onmessage = (message) => {
      const event = JSON.parse(message.data) as TelemetryEvent;
      if (event.seq < this.nextSeq) return; // replay overlap: drop duplicates
      this.nextSeq = event.seq + 1;
      this.handlers.onEvent(event);
    };
    this.source.onerror = () => {
      if (this.stopped) return;
      this.source?.close();
      this.source = null;
      this.reconnectTimer = setTimeout(() => {
        if (this.stopped) return;
        this.handlers.onReconnect?.(this.nextSeq);
        this.open();
      }, this.reconnectDelayMs);
    };
  }
}
