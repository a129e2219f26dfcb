// View-model builders: pure projections of API payloads into what the
// renderers draw. No DOM access here, which keeps everything snapshotable.

import type {
  Alert,
  AlertRuleThresholds,
  Reading,
  Statistics,
} from './types.js'
import { DEFAULT_THRESHOLDS } from './types.js'

export interface TrendPoint {
  timestamp_ms: number
  sbp: number
  dbp: number
  hr: number
  resting: boolean
  elevated: boolean
}

export interface TrendSeries {
  points: TrendPoint[]
  thresholds: AlertRuleThresholds
  from_ms: number
  to_ms: number
  sbp_range: [number, number]
}

export function isElevated(
  sbp: number,
  dbp: number,
  thresholds: AlertRuleThresholds = DEFAULT_THRESHOLDS,
): boolean {
  return sbp > thresholds.sbp_threshold_mmhg || dbp > thresholds.dbp_threshold_mmhg
}

export function buildTrendSeries(
  readings: Reading[],
  thresholds: AlertRuleThresholds = DEFAULT_THRESHOLDS,
): TrendSeries {
  // rendered points equal the API payload exactly; no resampling
  const points = [...readings]
    .sort((a, b) => a.timestamp_ms - b.timestamp_ms)
    .map((r) => ({
      timestamp_ms: r.timestamp_ms,
      sbp: r.sbp_mmhg,
      dbp: r.dbp_mmhg,
      hr: r.hr_bpm,
      resting: r.resting,
      elevated: isElevated(r.sbp_mmhg, r.dbp_mmhg, thresholds),
    }))
  const from_ms = points.length ? points[0].timestamp_ms : 0
  const to_ms = points.length ? points[points.length - 1].timestamp_ms : 0
  let lo = 60
  let hi = 160
  for (const p of points) {
    lo = Math.min(lo, p.dbp - 5)
    hi = Math.max(hi, p.sbp + 5)
  }
  return { points, thresholds, from_ms, to_ms, sbp_range: [Math.floor(lo), Math.ceil(hi)] }
}

export interface AlertCard {
  alert_id: string
  condition: string
  raised_at_ms: number
  evidence_summary: string
  acked: boolean
  acknowledged_by: string | null
}

export function buildAlertCards(alerts: Alert[]): AlertCard[] {
  return [...alerts]
    .sort((a, b) => b.raised_at_ms - a.raised_at_ms)
    .map((a) => ({
      alert_id: a.alert_id,
      condition: a.condition ?? 'Unclassified',
      raised_at_ms: a.raised_at_ms,
      evidence_summary: a.evidence
        .map((e) => `${fmtTime(e.timestamp_ms)} ${e.sbp_mmhg.toFixed(0)}/${e.dbp_mmhg.toFixed(0)}`)
        .join(' and '),
      acked: a.acknowledged_by !== null,
      acknowledged_by: a.acknowledged_by,
    }))
}

/** Mark one card acknowledged after the server confirmed it. */
export function applyAck(cards: AlertCard[], alertId: string, by: string): AlertCard[] {
  return cards.map((c) =>
    c.alert_id === alertId ? { ...c, acked: true, acknowledged_by: by } : c,
  )
}

export interface StatLine {
  label: string
  count: number
  sbp: string
  dbp: string
  hr: string
}

export function buildStatLines(stats: Statistics): StatLine[] {
  const line = (label: string, bucket: Statistics['overall']): StatLine => ({
    label,
    count: bucket.count,
    sbp: bucket.sbp ? `${bucket.sbp.mean.toFixed(1)} (${bucket.sbp.min.toFixed(0)}–${bucket.sbp.max.toFixed(0)})` : '—',
    dbp: bucket.dbp ? `${bucket.dbp.mean.toFixed(1)} (${bucket.dbp.min.toFixed(0)}–${bucket.dbp.max.toFixed(0)})` : '—',
    hr: bucket.hr ? `${bucket.hr.mean.toFixed(1)}` : '—',
  })
  return [
    line('all', stats.overall),
    line('resting', stats.resting),
    line('active', stats.active),
  ]
}

export function fmtTime(ms: number): string {
  return new Date(ms).toISOString().replace('T', ' ').slice(0, 16)
}

export function validateScheduleInput(
  intervalMin: number,
  restingStart: string,
  restingEnd: string,
): string | null {
  if (!Number.isInteger(intervalMin) || intervalMin < 1 || intervalMin > 240) {
    return 'interval must be a whole number of minutes between 1 and 240'
  }
  const clock = /^([01]\d|2[0-3]):[0-5]\d$/
  if (!clock.test(restingStart) || !clock.test(restingEnd)) {
    return 'resting window times must be HH:MM'
  }
  return null
}
