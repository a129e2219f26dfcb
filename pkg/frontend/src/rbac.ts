// Mirror of the server's role/action matrix: the UI never renders a
// control the session's role would be denied server-side.

import type { Role } from './types.js'

export type UiAction =
  | 'ack_alert'
  | 'edit_schedule'
  | 'enter_clinical_data'
  | 'run_risk_score'

const ALLOWED: Record<Role, ReadonlySet<UiAction>> = {
  patient: new Set<UiAction>(['edit_schedule', 'run_risk_score']),
  family: new Set<UiAction>([]),
  clinician: new Set<UiAction>(['ack_alert', 'enter_clinical_data', 'run_risk_score']),
  admin: new Set<UiAction>([]),
}

export function can(role: Role, action: UiAction): boolean {
  return ALLOWED[role]?.has(action) ?? false
}
