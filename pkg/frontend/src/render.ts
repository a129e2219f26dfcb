// Pure string renderers. Every view is a deterministic function of its
// view-model, so fixture snapshots pin the rendered output byte-for-byte.

import type { AlertCard, StatLine, TrendSeries } from './model.js'
import { fmtTime } from './model.js'
import { can, type UiAction } from './rbac.js'
import type { Clinical, Role, Schedule } from './types.js'

const W = 860
const H = 300
const PAD = { left: 44, right: 12, top: 12, bottom: 26 }

function esc(text: string): string {
  return text.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;')
}

function x(ms: number, s: TrendSeries): number {
  const span = Math.max(1, s.to_ms - s.from_ms)
  return PAD.left + ((ms - s.from_ms) / span) * (W - PAD.left - PAD.right)
}

function y(mmhg: number, s: TrendSeries): number {
  const [lo, hi] = s.sbp_range
  return PAD.top + (1 - (mmhg - lo) / Math.max(1, hi - lo)) * (H - PAD.top - PAD.bottom)
}

function r2(v: number): string {
  return v.toFixed(2)
}

/** Inline-SVG blood pressure trend with the 140/90 threshold overlay. */
export function renderTrendChart(series: TrendSeries): string {
  if (series.points.length === 0) {
    return '<div class="empty-state">No readings in this range.</div>'
  }
  const sbpPath = series.points.map((p, i) =>
    `${i === 0 ? 'M' : 'L'}${r2(x(p.timestamp_ms, series))},${r2(y(p.sbp, series))}`).join(' ')
  const dbpPath = series.points.map((p, i) =>
    `${i === 0 ? 'M' : 'L'}${r2(x(p.timestamp_ms, series))},${r2(y(p.dbp, series))}`).join(' ')
  const markers = series.points.map((p) => {
    const cls = p.elevated ? 'point elevated' : p.resting ? 'point resting' : 'point'
    return (
      `<circle class="${cls}" cx="${r2(x(p.timestamp_ms, series))}"` +
      ` cy="${r2(y(p.sbp, series))}" r="${p.elevated ? 4 : 2.5}"/>`
    )
  }).join('')
  const ySbp = r2(y(series.thresholds.sbp_threshold_mmhg, series))
  const yDbp = r2(y(series.thresholds.dbp_threshold_mmhg, series))
  const axis = [series.sbp_range[0], series.thresholds.dbp_threshold_mmhg,
                series.thresholds.sbp_threshold_mmhg, series.sbp_range[1]]
    .map((v) => `<text class="axis" x="4" y="${r2(y(v, series) + 4)}">${v}</text>`)
    .join('')
  return (
    `<svg viewBox="0 0 ${W} ${H}" role="img" aria-label="blood pressure trend">` +
    `<line class="threshold sbp" x1="${PAD.left}" y1="${ySbp}" x2="${W - PAD.right}" y2="${ySbp}"/>` +
    `<line class="threshold dbp" x1="${PAD.left}" y1="${yDbp}" x2="${W - PAD.right}" y2="${yDbp}"/>` +
    `<path class="series sbp" d="${sbpPath}"/>` +
    `<path class="series dbp" d="${dbpPath}"/>` +
    markers + axis +
    `<text class="axis" x="${PAD.left}" y="${H - 8}">${esc(fmtTime(series.from_ms))}</text>` +
    `<text class="axis end" x="${W - PAD.right}" y="${H - 8}" text-anchor="end">${esc(fmtTime(series.to_ms))}</text>` +
    `</svg>`
  )
}

export function renderAlertFeed(cards: AlertCard[], role: Role): string {
  if (cards.length === 0) {
    return '<div class="empty-state">No alerts.</div>'
  }
  const items = cards.map((c) => {
    const ackControl = !c.acked && can(role, 'ack_alert')
      ? `<button class="ack" data-alert="${esc(c.alert_id)}">Acknowledge</button>`
      : ''
    const state = c.acked
      ? `<span class="acked">acknowledged by ${esc(c.acknowledged_by ?? '?')}</span>`
      : '<span class="open">open</span>'
    return (
      `<li class="alert-card${c.acked ? ' acked' : ''}" data-alert="${esc(c.alert_id)}">` +
      `<span class="condition">${esc(c.condition)}</span>` +
      `<span class="raised">${esc(fmtTime(c.raised_at_ms))}</span>` +
      `<span class="evidence">${esc(c.evidence_summary)}</span>` +
      state + ackControl +
      `</li>`
    )
  }).join('')
  return `<ul class="alert-feed">${items}</ul>`
}

export function renderStats(lines: StatLine[], elevatedCount: number): string {
  const rows = lines.map((l) =>
    `<tr><th>${esc(l.label)}</th><td>${l.count}</td><td>${esc(l.sbp)}</td>` +
    `<td>${esc(l.dbp)}</td><td>${esc(l.hr)}</td></tr>`).join('')
  return (
    `<table class="stats"><thead><tr><th></th><th>n</th><th>SBP</th><th>DBP</th><th>HR</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>` +
    `<p class="elevated-count">Elevated readings: ${elevatedCount}</p>`
  )
}

export function renderSchedule(schedule: Schedule, role: Role): string {
  const editable = can(role, 'edit_schedule')
  const body = editable
    ? `<form id="schedule-form">` +
      `<label>Interval (min) <input name="interval_min" type="number" value="${schedule.interval_min}"/></label>` +
      `<label>Resting from <input name="resting_start" value="${esc(schedule.resting_window[0])}"/></label>` +
      `<label>to <input name="resting_end" value="${esc(schedule.resting_window[1])}"/></label>` +
      `<button type="submit">Save</button>` +
      `<span class="form-error" id="schedule-error"></span>` +
      `</form>`
    : `<p>Every ${schedule.interval_min} min, resting ${esc(schedule.resting_window[0])}–${esc(schedule.resting_window[1])} (read-only)</p>`
  return `<section class="schedule"><h3>Measurement schedule</h3>${body}</section>`
}

export function renderClinical(clinical: Clinical, role: Role): string {
  const fields = clinical.fields ?? {}
  const editable = can(role, 'enter_clinical_data')
  const entries = ['age_years', 'weight_kg', 'height_cm', 'race', 'smoker',
                   'cholesterol_mg_dl', 'gestational_age_weeks', 'proteinuria']
    .map((k) => {
      const value = fields[k]
      const shown = value === undefined || value === null ? '' : String(value)
      return editable
        ? `<label>${esc(k)} <input name="${esc(k)}" value="${esc(shown)}"/></label>`
        : `<div class="clinical-row"><span>${esc(k)}</span><span>${esc(shown || '—')}</span></div>`
    }).join('')
  const risk = clinical.last_risk
    ? `<div class="risk-panel">Risk score: <strong>${(clinical.last_risk.probability * 100).toFixed(1)}%</strong>` +
      ` <span class="computed-at">as of ${esc(fmtTime(clinical.last_risk.computed_at_ms))}</span></div>`
    : '<div class="risk-panel">No risk score yet.</div>'
  const body = editable
    ? `<form id="clinical-form">${entries}<button type="submit">Save clinical data</button>` +
      `<span class="form-error" id="clinical-error"></span></form>`
    : entries
  return (
    `<section class="clinical"><h3>Clinical data (v${clinical.version})</h3>` +
    body + risk + `</section>`
  )
}

export function renderAccessDenied(): string {
  return '<div class="access-denied">This account may not view that patient.</div>'
}

export function visibleActions(role: Role): UiAction[] {
  const actions: UiAction[] = ['ack_alert', 'edit_schedule', 'enter_clinical_data', 'run_risk_score']
  return actions.filter((a) => can(role, a))
}
