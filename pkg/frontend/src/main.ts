// App shell: campaign form -> run view with live debate console and controls.

import { abortCampaign, defaultConnect, getStatus, ResumableEventStream, submitCampaign } from './api';
import { fingerprint, ingest, newConsoleState, toConsoleLine } from './console';
import { mountConsole } from './consoleView';
import { renderDnaPanel } from './dnaPanel';
import type { CampaignForm, CampaignState, CampaignStatus } from './types';
import { isValid, validateCampaignForm } from './validate';

const TERMINAL: CampaignState[] = ['completed', 'failed'];

const root = document.getElementById('app');
if (root) {
  window.addEventListener('hashchange', () => route(root));
  route(root);
}

function route(app: HTMLElement): void {
  const hash = window.location.hash;
  const match = hash.match(/^#\/run\/(.+)$/);
  if (match && match[1]) {
    renderRunView(app, match[1]);
  } else {
    renderFormView(app);
  }
}

// -- campaign form ------------------------------------------------------------

function formValues(form: HTMLFormElement): CampaignForm {
  const data = new FormData(form);
  const seed = String(data.get('seed') ?? '').trim();
  return {
    url: String(data.get('url') ?? ''),
    objective: String(data.get('objective') ?? ''),
    n_scenes: Number(data.get('n_scenes') ?? 0),
    retry_budget: Number(data.get('retry_budget') ?? 3),
    backend_profile: String(data.get('backend_profile') ?? 'sim'),
    ...(seed ? { seed: Number(seed) } : {}),
  };
}

function renderFormView(app: HTMLElement, prefill?: Partial<CampaignForm>): void {
  app.innerHTML = `
    <h1>Genflow Ad Studio</h1>
    <form id="campaign-form" novalidate>
      <label>Target URL
        <input name="url" placeholder="https://brand.example or fixture:acme/index.html"
               value="${prefill?.url ?? ''}">
        <span class="field-error" data-for="url"></span>
      </label>
      <label>Campaign objective
        <input name="objective" placeholder="Spring launch spot" value="${prefill?.objective ?? ''}">
        <span class="field-error" data-for="objective"></span>
      </label>
      <label>Scenes
        <input name="n_scenes" type="number" min="1" value="${prefill?.n_scenes ?? 4}">
        <span class="field-error" data-for="n_scenes"></span>
      </label>
      <label>Retry budget
        <input name="retry_budget" type="number" min="0" value="${prefill?.retry_budget ?? 3}">
        <span class="field-error" data-for="retry_budget"></span>
      </label>
      <label>Backend profile
        <input name="backend_profile" value="${prefill?.backend_profile ?? 'sim'}">
      </label>
      <label>Seed (optional)
        <input name="seed" type="number" value="${prefill?.seed ?? ''}">
      </label>
      <button type="submit">Launch campaign</button>
      <p class="banner" hidden></p>
    </form>
  `;
  const form = app.querySelector<HTMLFormElement>('#campaign-form')!;
  form.addEventListener('submit', async (event) => {
    event.preventDefault();
    const values = formValues(form);
    const errors = validateCampaignForm(values);
    showFieldErrors(form, errors);
    if (!isValid(errors)) return; // invalid: no request leaves the browser

    const result = await submitCampaign(values);
    if (result.ok) {
      window.location.hash = `#/run/${result.campaignId}`;
    } else if (result.kind === 'invalid') {
      showFieldErrors(form, result.errors);
    } else if (result.kind === 'busy') {
      banner(form, 'Service at capacity — retry in a moment.');
    } else {
      banner(form, `Submission failed (${result.status}).`);
    }
  });
}

function showFieldErrors(form: HTMLFormElement, errors: Record<string, string>): void {
  for (const slot of form.querySelectorAll<HTMLElement>('.field-error')) {
    slot.textContent = errors[slot.dataset.for ?? ''] ?? '';
  }
}

function banner(form: HTMLFormElement, text: string): void {
  const node = form.querySelector<HTMLElement>('.banner')!;
  node.textContent = text;
  node.hidden = false;
}

// -- run view -------------------------------------------------------------------

function renderRunView(app: HTMLElement, campaignId: string): void {
  app.innerHTML = `
    <h1>Run <code>${campaignId}</code> <span id="state-badge" class="badge">pending</span></h1>
    <div class="run-grid">
      <aside>
        <div id="dna-slot"></div>
        <div id="scene-cards"></div>
        <div class="controls">
          <button id="abort-btn">Abort</button>
          <button id="rerun-btn" disabled>Re-run</button>
        </div>
      </aside>
      <main id="log-console" class="log-console"></main>
    </div>
  `;
  const badge = app.querySelector<HTMLElement>('#state-badge')!;
  const dnaSlot = app.querySelector<HTMLElement>('#dna-slot')!;
  const view = mountConsole(
    app.querySelector<HTMLElement>('#log-console')!,
    app.querySelector<HTMLElement>('#scene-cards')!,
  );
  dnaSlot.replaceChildren(renderDnaPanel(null));

  const state = newConsoleState();
  const stream = new ResumableEventStream(defaultConnect(campaignId), {
    onEvent: (event) => {
      if (ingest(state, event)) {
        view.appendLine(toConsoleLine(event));
        view.updateScenes([...state.scenes.values()]);
      }
    },
    onReconnect: (fromSeq) => view.addMarker(`— reconnected (resuming from ${fromSeq}) —`),
  });
  stream.start(0);

  let lastStatus: CampaignStatus | null = null;
  const poll = setInterval(async () => {
    try {
      const status = await getStatus(campaignId);
      lastStatus = status;
      badge.textContent = status.state;
      badge.className = `badge state-${status.state}`;
      if (status.dna) dnaSlot.replaceChildren(renderDnaPanel(status.dna));
      if (TERMINAL.includes(status.state)) {
        clearInterval(poll);
        // give the replay tail a beat to drain, then release the stream
        setTimeout(() => stream.stop(), 1000);
        const rerun = app.querySelector<HTMLButtonElement>('#rerun-btn')!;
        rerun.disabled = false;
        const abort = app.querySelector<HTMLButtonElement>('#abort-btn')!;
        abort.disabled = true;
      }
    } catch {
      // transient polling failures are fine; the stream keeps its own state
    }
  }, 400);

  app.querySelector<HTMLButtonElement>('#abort-btn')!.addEventListener('click', () => {
    void abortCampaign(campaignId);
  });
  app.querySelector<HTMLButtonElement>('#rerun-btn')!.addEventListener('click', () => {
    const status = lastStatus;
    window.location.hash = '';
    if (status) {
      // pre-filled, editable resubmission of the same campaign
      renderFormView(document.getElementById('app')!, {
        url: status.url,
        objective: status.objective,
        n_scenes: status.n_scenes,
        backend_profile: status.backend_profile,
        retry_budget: 3,
        seed: status.seed,
      });
    }
  });

  void fingerprint; // re-exported for tests via console.ts
}
