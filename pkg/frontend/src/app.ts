// Browser bootstrap: fetch, render, wire events, long-poll notifications.
// Session parameters come from the query string (?token=…&patient=…&role=…&user=…).

import { HttpApiClient } from './api.js'
import {
  buildAlertCards,
  buildStatLines,
  buildTrendSeries,
  type AlertCard,
} from './model.js'
import {
  renderAccessDenied,
  renderAlertFeed,
  renderClinical,
  renderSchedule,
  renderStats,
  renderTrendChart,
} from './render.js'
import { ackAlertFlow, editScheduleFlow, enterClinicalFlow } from './controller.js'
import type { Role, Schedule } from './types.js'

function el(id: string): HTMLElement {
  const node = document.getElementById(id)
  if (!node) throw new Error(`missing #${id}`)
  return node
}

async function main(): Promise<void> {
  const params = new URLSearchParams(location.search)
  const token = params.get('token') ?? ''
  const patientId = params.get('patient') ?? ''
  const role = (params.get('role') ?? 'clinician') as Role
  const userId = params.get('user') ?? 'me'
  const api = new HttpApiClient('', token)

  let cards: AlertCard[] = []
  let schedule: Schedule = { interval_min: 15, resting_window: ['22:00', '06:00'] }

  async function refreshAll(): Promise<void> {
    try {
      const [readings, stats, alerts, clinical, sched] = await Promise.all([
        api.readings(patientId),
        api.statistics(patientId),
        api.alerts(patientId),
        api.clinical(patientId),
        api.schedule(patientId),
      ])
      cards = buildAlertCards(alerts)
      schedule = sched
      el('trend').innerHTML = renderTrendChart(buildTrendSeries(readings))
      el('stats').innerHTML = renderStats(buildStatLines(stats), stats.elevated_count)
      el('alerts').innerHTML = renderAlertFeed(cards, role)
      el('schedule').innerHTML = renderSchedule(schedule, role)
      el('clinical').innerHTML = renderClinical(clinical, role)
    } catch (err) {
      if ((err as { status?: number }).status === 403) {
        document.body.innerHTML = renderAccessDenied()
        return
      }
      throw err
    }
  }

  document.addEventListener('click', async (event) => {
    const target = event.target as HTMLElement
    if (target.matches('button.ack')) {
      const alertId = target.dataset.alert!
      const outcome = await ackAlertFlow(api, patientId, cards, alertId, userId)
      cards = outcome.cards
      el('alerts').innerHTML = renderAlertFeed(cards, role)
    }
  })

  document.addEventListener('submit', async (event) => {
    const form = event.target as HTMLFormElement
    event.preventDefault()
    const data = new FormData(form)
    if (form.id === 'schedule-form') {
      const outcome = await editScheduleFlow(
        api, patientId, schedule,
        Number(data.get('interval_min')),
        String(data.get('resting_start')),
        String(data.get('resting_end')),
      )
      schedule = outcome.schedule
      if (outcome.error) {
        el('schedule-error').textContent = outcome.error
      } else {
        el('schedule').innerHTML = renderSchedule(schedule, role)
      }
    }
    if (form.id === 'clinical-form') {
      const fields: Record<string, unknown> = {}
      for (const [key, value] of data.entries()) {
        if (value !== '') fields[key] = coerce(String(value))
      }
      const outcome = await enterClinicalFlow(api, patientId, fields)
      if (outcome.error) {
        el('clinical-error').textContent = outcome.error
      } else {
        await refreshAll()  // risk panel and condition may have changed
      }
    }
  })

  async function pollLoop(): Promise<void> {
    let since = 0
    for (;;) {
      try {
        const deliveries = await api.pollDeliveries(since, 25)
        if (deliveries.length) {
          since = Math.max(...deliveries.map((d: { delivery_id: number }) => d.delivery_id))
          await refreshAll()
        }
      } catch {
        await new Promise((r) => setTimeout(r, 2000))
      }
    }
  }

  await refreshAll()
  void pollLoop()
}

function coerce(value: string): unknown {
  if (value === 'true') return true
  if (value === 'false') return false
  const n = Number(value)
  return Number.isNaN(n) ? value : n
}

void main()
