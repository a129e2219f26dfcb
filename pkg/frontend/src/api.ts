// Thin typed client for the server REST API. The controller depends on
// this interface, so tests can substitute a scripted fake.

import type { Alert, Clinical, Reading, Schedule, Statistics } from './types.js'

export interface ApiError {
  status: number
  detail: unknown
}

export interface ApiClient {
  readings(patientId: string, fromMs?: number, toMs?: number): Promise<Reading[]>
  statistics(patientId: string): Promise<Statistics>
  alerts(patientId: string): Promise<Alert[]>
  ackAlert(alertId: string): Promise<{ ok: true } | { conflict: true }>
  clinical(patientId: string): Promise<Clinical>
  putClinical(patientId: string, fields: Record<string, unknown>): Promise<void>
  schedule(patientId: string): Promise<Schedule>
  putSchedule(patientId: string, schedule: Schedule): Promise<void>
  riskScore(patientId: string): Promise<number>
  pollDeliveries(sinceId: number, timeoutS: number): Promise<{ delivery_id: number; alert_id: string }[]>
}

export class HttpApiClient implements ApiClient {
  constructor(private baseUrl: string, private token: string) {}

  private async request(method: string, path: string, body?: unknown): Promise<any> {
    const resp = await fetch(this.baseUrl + path, {
      method,
      headers: {
        Authorization: `Bearer ${this.token}`,
        ...(body !== undefined ? { 'Content-Type': 'application/json' } : {}),
      },
      body: body !== undefined ? JSON.stringify(body) : undefined,
    })
    if (!resp.ok) {
      const detail = await resp.json().catch(() => resp.statusText)
      throw { status: resp.status, detail } satisfies ApiError
    }
    return resp.json()
  }

  async readings(patientId: string, fromMs?: number, toMs?: number): Promise<Reading[]> {
    const params = new URLSearchParams()
    if (fromMs !== undefined) params.set('from', String(fromMs))
    if (toMs !== undefined) params.set('to', String(toMs))
    const qs = params.size ? `?${params}` : ''
    return (await this.request('GET', `/api/v1/patients/${patientId}/readings${qs}`)).readings
  }

  async statistics(patientId: string): Promise<Statistics> {
    return this.request('GET', `/api/v1/patients/${patientId}/statistics`)
  }

  async alerts(patientId: string): Promise<Alert[]> {
    return (await this.request('GET', `/api/v1/patients/${patientId}/alerts`)).alerts
  }

  async ackAlert(alertId: string): Promise<{ ok: true } | { conflict: true }> {
    try {
      await this.request('POST', `/api/v1/alerts/${alertId}/ack`)
      return { ok: true }
    } catch (err) {
      if ((err as ApiError).status === 409) return { conflict: true }
      throw err
    }
  }

  async clinical(patientId: string): Promise<Clinical> {
    return this.request('GET', `/api/v1/patients/${patientId}/clinical`)
  }

  async putClinical(patientId: string, fields: Record<string, unknown>): Promise<void> {
    await this.request('PUT', `/api/v1/patients/${patientId}/clinical`, { fields })
  }

  async schedule(patientId: string): Promise<Schedule> {
    return this.request('GET', `/api/v1/patients/${patientId}/schedule`)
  }

  async putSchedule(patientId: string, schedule: Schedule): Promise<void> {
    await this.request('PUT', `/api/v1/patients/${patientId}/schedule`, schedule)
  }

  async riskScore(patientId: string): Promise<number> {
    return (await this.request('POST', `/api/v1/patients/${patientId}/risk-score`)).probability
  }

  async pollDeliveries(sinceId: number, timeoutS: number) {
    const qs = `?since=${sinceId}&timeout_s=${timeoutS}`
    return (await this.request('GET', `/api/v1/notifications/stream${qs}`)).deliveries
  }
}
