// DOM rendering for the debate console and the per-scene cards.
// Color mapping lives here and only here: the wire carries agent_role.

import type { ConsoleLine } from './types';
import type { SceneCard } from './console';

export const ROLE_CLASS: Record<string, string> = {
  director_agent: 'role-director-agent', // styled cyan
  brand_safety_agent: 'role-brand-safety-agent', // styled pink
  orchestrator: 'role-orchestrator',
  generator: 'role-generator',
  director_llm: 'role-director-llm',
  enhancer: 'role-enhancer',
  system: 'role-system',
};

export function renderConsoleLine(line: ConsoleLine): HTMLElement {
  const row = document.createElement('div');
  row.className = `console-line sev-${line.severity} ${ROLE_CLASS[line.agent_role] ?? 'role-system'}`;
  row.dataset.seq = String(line.seq);

  const seq = document.createElement('span');
  seq.className = 'seq';
  seq.textContent = String(line.seq).padStart(4, '0');

  const role = document.createElement('span');
  role.className = 'role';
  role.textContent = line.agent_role;

  const text = document.createElement('span');
  text.className = 'text';
  text.textContent = line.scene_index !== null ? `[scene ${line.scene_index}] ${line.text}` : line.text;

  row.append(seq, role, text);
  return row;
}

export function renderSceneCard(card: SceneCard): HTMLElement {
  const node = document.createElement('div');
  node.className = 'scene-card' + (card.alert ? ' alert' : '');
  node.dataset.scene = String(card.sceneIndex);
  const status =
    card.committed === null ? 'running' : card.committed ? 'committed' : 'failed';
  node.innerHTML = `
    <header>Scene ${card.sceneIndex + 1}</header>
    <span class="attempts">attempt ${Math.max(card.attempts, 1)}</span>
    <span class="status status-${status}">${status}</span>
  `;
  if (card.alert && card.violations.length > 0) {
    const alert = document.createElement('p');
    alert.className = 'violations';
    alert.textContent = card.violations.join(', ');
    node.append(alert);
  }
  return node;
}

export interface ConsoleView {
  appendLine(line: ConsoleLine): void;
  updateScenes(cards: SceneCard[]): void;
  addMarker(text: string): void;
}

export function mountConsole(logRoot: HTMLElement, scenesRoot: HTMLElement): ConsoleView {
  return {
    appendLine(line) {
      logRoot.append(renderConsoleLine(line));
      logRoot.scrollTop = logRoot.scrollHeight;
    },
    updateScenes(cards) {
      scenesRoot.replaceChildren(...cards.map(renderSceneCard));
    },
    addMarker(text) {
      // connection markers are the only lines not backed by an event
      const marker = document.createElement('div');
      marker.className = 'console-line marker';
      marker.textContent = text;
      logRoot.append(marker);
    },
  };
}
