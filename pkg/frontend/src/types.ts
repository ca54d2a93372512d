// Wire types, mirrored from the service's JSON schemas.

export type AgentRole =
  | 'system'
  | 'director_llm'
  | 'enhancer'
  | 'generator'
  | 'director_agent'
  | 'brand_safety_agent'
  | 'orchestrator';

export type EventKind =
  | 'phase_start'
  | 'phase_end'
  | 'generation'
  | 'verdict'
  | 'consensus'
  | 'corrective'
  | 'violation_state'
  | 'repair'
  | 'fault';

export interface TelemetryEvent {
  seq: number;
  ts: number;
  run_id: string;
  scene_index: number | null;
  attempt: number | null;
  agent_role: AgentRole;
  kind: EventKind;
  payload: Record<string, unknown>;
}

export interface BrandDna {
  palette: string[];
  typography: string[];
  tonal_voice: string[];
  forbidden_tropes: string[];
  source_url: string;
}

export type CampaignState =
  | 'pending'
  | 'extracting'
  | 'normalizing'
  | 'scripting'
  | 'generating'
  | 'completed'
  | 'failed';

export interface CampaignStatus {
  campaign_id: string;
  state: CampaignState;
  url: string;
  objective: string;
  n_scenes: number;
  backend_profile: string;
  seed: number;
  progress: { scene: number | null; of: number; attempt: number | null } | null;
  dna: BrandDna | null;
  error: string | null;
}

export interface CampaignForm {
  url: string;
  objective: string;
  n_scenes: number;
  retry_budget: number;
  backend_profile: string;
  seed?: number;
}

export type Severity = 'info' | 'critique' | 'violation';

export interface ConsoleLine {
  seq: number;
  agent_role: AgentRole;
  kind: EventKind;
  text: string;
  severity: Severity;
  scene_index: number | null;
  attempt: number | null;
}
