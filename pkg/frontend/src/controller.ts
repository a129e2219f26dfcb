// UI state transitions. Mutations go to the server first; the local state
// only changes on confirmation, so the view always mirrors the server.

import type { ApiClient, ApiError } from './api.js'
import { applyAck, buildAlertCards, type AlertCard, validateScheduleInput } from './model.js'
import type { Schedule } from './types.js'

export interface AckOutcome {
  cards: AlertCard[]
  note: string
}

/**
 * Acknowledge an alert. A 409 means another session got there first; the
 * feed is refreshed from the server so both sessions converge on the
 * single ack record.
 */
export async function ackAlertFlow(
  api: ApiClient,
  patientId: string,
  cards: AlertCard[],
  alertId: string,
  userId: string,
): Promise<AckOutcome> {
  const result = await api.ackAlert(alertId)
  if ('ok' in result) {
    return { cards: applyAck(cards, alertId, userId), note: 'acknowledged' }
  }
  const fresh = buildAlertCards(await api.alerts(patientId))
  return { cards: fresh, note: 'already acknowledged elsewhere; refreshed' }
}

export interface ScheduleOutcome {
  schedule: Schedule
  error: string | null
}

/** Optimistic schedule edit with rollback when the server rejects it. */
export async function editScheduleFlow(
  api: ApiClient,
  patientId: string,
  current: Schedule,
  intervalMin: number,
  restingStart: string,
  restingEnd: string,
): Promise<ScheduleOutcome> {
  const clientError = validateScheduleInput(intervalMin, restingStart, restingEnd)
  if (clientError !== null) {
    return { schedule: current, error: clientError }  // no request sent
  }
  const candidate: Schedule = {
    interval_min: intervalMin,
    resting_window: [restingStart, restingEnd],
  }
  try {
    await api.putSchedule(patientId, candidate)
    return { schedule: candidate, error: null }
  } catch (err) {
    return { schedule: current, error: formatApiError(err) }
  }
}

export interface ClinicalOutcome {
  saved: boolean
  error: string | null
  riskProbability: number | null
}

/** Save clinical fields; the risk panel refreshes after a successful save. */
export async function enterClinicalFlow(
  api: ApiClient,
  patientId: string,
  fields: Record<string, unknown>,
): Promise<ClinicalOutcome> {
  try {
    await api.putClinical(patientId, fields)
  } catch (err) {
    return { saved: false, error: formatApiError(err), riskProbability: null }
  }
  const clinical = await api.clinical(patientId)
  return {
    saved: true,
    error: null,
    riskProbability: clinical.last_risk?.probability ?? null,
  }
}

export function formatApiError(err: unknown): string {
  const apiErr = err as ApiError
  if (apiErr && typeof apiErr.status === 'number') {
    const detail = Array.isArray(apiErr.detail) ? apiErr.detail.join('; ') : String(apiErr.detail)
    return `server rejected the change (${apiErr.status}): ${detail}`
  }
  return String(err)
}
