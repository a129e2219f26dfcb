// Mutation flows against a scripted server double: ack convergence under
// a concurrent ack, optimistic schedule edits with rollback, clinical save
// refreshing the risk panel.

import { describe, expect, it } from 'vitest'

import type { ApiClient } from '../src/api.js'
import { ackAlertFlow, editScheduleFlow, enterClinicalFlow } from '../src/controller.js'
import { buildAlertCards } from '../src/model.js'
import type { Alert, Clinical, Schedule } from '../src/types.js'
import { fixtures } from './fixtures.js'

function fakeApi(overrides: Partial<ApiClient>): ApiClient {
  const unused = async () => {
    throw new Error('not scripted for this test')
  }
  return {
    readings: unused,
    statistics: unused,
    alerts: unused,
    ackAlert: unused,
    clinical: unused,
    putClinical: unused,
    schedule: unused,
    putSchedule: unused,
    riskScore: unused,
    pollDeliveries: unused,
    ...overrides,
  } as ApiClient
}

describe('ack round-trip', () => {
  it('updates the card only after server confirmation', async () => {
    const cards = buildAlertCards(fixtures.alertsOpen())
    const api = fakeApi({ ackAlert: async () => ({ ok: true }) })
    const outcome = await ackAlertFlow(api, 'P1', cards, cards[0].alert_id, 'dr-1')
    expect(outcome.cards[0].acked).toBe(true)
    expect(outcome.cards[0].acknowledged_by).toBe('dr-1')
  })

  it('converges on 409 by refreshing from the server', async () => {
    const cards = buildAlertCards(fixtures.alertsOpen())
    const serverState: Alert[] = fixtures.alertsAcked()
    const api = fakeApi({
      ackAlert: async () => ({ conflict: true }),
      alerts: async () => serverState,
    })
    const outcome = await ackAlertFlow(api, 'P1', cards, cards[0].alert_id, 'dr-2')
    expect(outcome.cards[0].acked).toBe(true)
    expect(outcome.cards[0].acknowledged_by).toBe('dr-1') // the first ack wins
    expect(outcome.note).toContain('refreshed')
  })

  it('two sessions converge to one ack record', async () => {
    const open = buildAlertCards(fixtures.alertsOpen())
    const ackedOnServer: Alert[] = fixtures.alertsAcked()
    let taken = false
    const api = fakeApi({
      ackAlert: async () => {
        if (taken) return { conflict: true }
        taken = true
        return { ok: true }
      },
      alerts: async () => ackedOnServer,
    })
    const first = await ackAlertFlow(api, 'P1', open, open[0].alert_id, 'dr-1')
    const second = await ackAlertFlow(api, 'P1', open, open[0].alert_id, 'dr-2')
    expect(first.cards[0].acknowledged_by).toBe('dr-1')
    expect(second.cards[0].acknowledged_by).toBe('dr-1')
  })
})

describe('schedule edits', () => {
  const current: Schedule = { interval_min: 15, resting_window: ['22:00', '06:00'] }

  it('sends nothing for interval 0 and surfaces the inline error', async () => {
    let called = false
    const api = fakeApi({
      putSchedule: async () => {
        called = true
      },
    })
    const outcome = await editScheduleFlow(api, 'P1', current, 0, '22:00', '06:00')
    expect(called).toBe(false)
    expect(outcome.error).toMatch(/interval/)
    expect(outcome.schedule).toEqual(current)
  })

  it('applies the edit on server success', async () => {
    const api = fakeApi({ putSchedule: async () => undefined })
    const outcome = await editScheduleFlow(api, 'P1', current, 30, '21:30', '05:00')
    expect(outcome.error).toBeNull()
    expect(outcome.schedule.interval_min).toBe(30)
  })

  it('rolls back when the server rejects', async () => {
    const api = fakeApi({
      putSchedule: async () => {
        throw { status: 422, detail: ['interval_min must be an integer in [1, 240]'] }
      },
    })
    const outcome = await editScheduleFlow(api, 'P1', current, 239, '21:30', '05:00')
    expect(outcome.schedule).toEqual(current)
    expect(outcome.error).toContain('422')
  })
})

describe('clinical entry', () => {
  it('refreshes the risk panel after a successful save', async () => {
    const after: Clinical = {
      ...fixtures.clinical(),
      last_risk: { probability: 0.83, computed_at_ms: 1 },
    }
    const api = fakeApi({
      putClinical: async () => undefined,
      clinical: async () => after,
    })
    const outcome = await enterClinicalFlow(api, 'P1', { proteinuria: true })
    expect(outcome.saved).toBe(true)
    expect(outcome.riskProbability).toBeCloseTo(0.83)
  })

  it('surfaces validation errors inline', async () => {
    const api = fakeApi({
      putClinical: async () => {
        throw { status: 422, detail: ['cholesterol_mg_dl -5.0 outside [50.0, 500.0]'] }
      },
    })
    const outcome = await enterClinicalFlow(api, 'P1', { cholesterol_mg_dl: -5 })
    expect(outcome.saved).toBe(false)
    expect(outcome.error).toContain('cholesterol')
  })
})
