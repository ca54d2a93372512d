import { describe, expect, it, vi } from 'vitest';

import { submitCampaign } from '../src/api';

const form = {
  url: 'fixture:acme/index.html',
  objective: 'x',
  n_scenes: 2,
  retry_budget: 1,
  backend_profile: 'sim',
  seed: 7,
};

function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'content-type': 'application/json' },
  });
}

describe('submitCampaign', () => {
  it('posts the documented body shape and returns the id', async () => {
    const fetchFn = vi.fn(async (url: RequestInfo | URL, init?: RequestInit) => {
      expect(url).toBe('/v1/campaigns');
      const body = JSON.parse(String(init?.body));
      expect(body).toEqual({
        url: form.url,
        objective: 'x',
        n_scenes: 2,
        policy: { retry_budget: 1, consensus: 'strict_and' },
        backend_profile: 'sim',
        seed: 7,
      });
      return jsonResponse(202, { campaign_id: 'cmp-1', state: 'pending' });
    });
    const result = await submitCampaign(form, fetchFn as unknown as typeof fetch);
    expect(result).toEqual({ ok: true, campaignId: 'cmp-1' });
  });

  it('maps 422 details onto field errors', async () => {
    const fetchFn = vi.fn(async () =>
      jsonResponse(422, {
        detail: [{ loc: ['url'], msg: 'Field required', type: 'missing' }],
      }),
    );
    const result = await submitCampaign(form, fetchFn as unknown as typeof fetch);
    expect(result).toEqual({ ok: false, kind: 'invalid', errors: { url: 'Field required' } });
  });

  it('surfaces 503 capacity as retryable', async () => {
    const fetchFn = vi.fn(async () => jsonResponse(503, { detail: 'at capacity' }));
    const result = await submitCampaign(form, fetchFn as unknown as typeof fetch);
    expect(result).toEqual({ ok: false, kind: 'busy' });
  });
});
