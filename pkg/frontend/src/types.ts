// Server API payload shapes (see docs/api.md in the repository root).

export type Role = 'patient' | 'family' | 'clinician' | 'admin'

export interface Reading {
  id?: string
  patient_id: string
  device_id: string
  timestamp_ms: number
  sbp_mmhg: number
  dbp_mmhg: number
  hr_bpm: number
  resting: boolean
  quality: number
}

export interface AlertEvidence {
  device_id: string
  timestamp_ms: number
  sbp_mmhg: number
  dbp_mmhg: number
}

export interface Alert {
  alert_id: string
  patient_id: string
  raised_at_ms: number
  condition: string | null
  acknowledged_by: string | null
  ack_at_ms: number | null
  evidence: AlertEvidence[]
}

export interface StatsBucket {
  count: number
  sbp: { mean: number; min: number; max: number } | null
  dbp: { mean: number; min: number; max: number } | null
  hr: { mean: number; min: number; max: number } | null
}

export interface Statistics {
  patient_id: string
  overall: StatsBucket
  resting: StatsBucket
  active: StatsBucket
  elevated_count: number
}

export interface Schedule {
  interval_min: number
  resting_window: [string, string]
}

export interface Clinical {
  patient_id: string
  version: number
  fields: Record<string, unknown> | null
  last_risk: { probability: number; computed_at_ms: number } | null
}

export interface AlertRuleThresholds {
  sbp_threshold_mmhg: number
  dbp_threshold_mmhg: number
}

export const DEFAULT_THRESHOLDS: AlertRuleThresholds = {
  sbp_threshold_mmhg: 140,
  dbp_threshold_mmhg: 90,
}
