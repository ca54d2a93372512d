// Brand DNA panel: palette swatches, typography list, forbidden tropes.

import type { BrandDna } from './types';

export function renderDnaPanel(dna: BrandDna | null): HTMLElement {
  const panel = document.createElement('section');
  panel.className = 'dna-panel';
  if (!dna) {
    panel.innerHTML = '<p class="dna-pending">Brand DNA compiling…</p>';
    return panel;
  }

  const swatches = document.createElement('div');
  swatches.className = 'swatches';
  for (const color of dna.palette) {
    const swatch = document.createElement('span');
    swatch.className = 'swatch';
    swatch.style.backgroundColor = color;
    swatch.title = color;
    const label = document.createElement('code');
    label.textContent = color;
    const cell = document.createElement('span');
    cell.className = 'swatch-cell';
    cell.append(swatch, label);
    swatches.append(cell);
  }

  const typography = document.createElement('ul');
  typography.className = 'typography';
  for (const family of dna.typography) {
    const item = document.createElement('li');
    item.textContent = family;
    typography.append(item);
  }

  panel.append(heading('Palette'), swatches, heading('Typography'), typography);

  if (dna.tonal_voice.length > 0) {
    panel.append(heading('Tonal voice'), tagList(dna.tonal_voice, 'voice'));
  }
  if (dna.forbidden_tropes.length > 0) {
    // section hidden entirely when there are no tropes
    panel.append(heading('Forbidden tropes'), tagList(dna.forbidden_tropes, 'trope'));
  }
  return panel;
}

function heading(text: string): HTMLElement {
  const node = document.createElement('h3');
  node.textContent = text;
  return node;
}

function tagList(values: string[], className: string): HTMLElement {
  const list = document.createElement('ul');
  list.className = className;
  for (const value of values) {
    const item = document.createElement('li');
    item.textContent = value;
    list.append(item);
  }
  return list;
}
