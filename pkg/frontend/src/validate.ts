// Client-side form validation; must mirror the service's 422 rules exactly:
// url present, objective non-empty, n_scenes >= 1.

import type { CampaignForm } from './types';

export interface FieldErrors {
  [field: string]: string;
}

export function validateCampaignForm(form: Partial<CampaignForm>): FieldErrors {
  const errors: FieldErrors = {};
  if (!form.url || !form.url.trim()) {
    errors.url = 'Target URL is required';
  }
  if (!form.objective || !form.objective.trim()) {
    errors.objective = 'Objective must be non-empty';
  }
  const scenes = form.n_scenes;
  if (scenes === undefined || !Number.isInteger(scenes) || scenes < 1) {
    errors.n_scenes = 'Scene count must be an integer >= 1';
  }
  if (form.retry_budget !== undefined && (!Number.isInteger(form.retry_budget) || form.retry_budget < 0)) {
    errors.retry_budget = 'Retry budget must be an integer >= 0';
  }
  return errors;
}

export function isValid(errors: FieldErrors): boolean {
  return Object.keys(errors).length === 0;
}
