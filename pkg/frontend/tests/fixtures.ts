import { readFileSync } from 'node:fs'
import { dirname, join } from 'node:path'
import { fileURLToPath } from 'node:url'

import type { Alert, Clinical, Reading, Schedule, Statistics } from '../src/types.js'

const here = dirname(fileURLToPath(import.meta.url))

function load<T>(name: string): T {
  return JSON.parse(readFileSync(join(here, '..', 'fixtures', `${name}.json`), 'utf-8')) as T
}

export const fixtures = {
  readings: (): Reading[] => load<{ readings: Reading[] }>('readings').readings,
  readingsEmpty: (): Reading[] => load<{ readings: Reading[] }>('readings_empty').readings,
  statistics: (): Statistics => load<Statistics>('statistics'),
  alertsOpen: (): Alert[] => load<{ alerts: Alert[] }>('alerts_open').alerts,
  alertsAcked: (): Alert[] => load<{ alerts: Alert[] }>('alerts_acked').alerts,
  schedule: (): Schedule => load<Schedule>('schedule'),
  clinical: (): Clinical => load<Clinical>('clinical'),
}
