// Shapes of the API's JSON bodies. These mirror the server exactly;
// the console adds nothing of its own on top of them.

export type Color = 'red' | 'yellow' | 'green';

export interface TriageEntry {
  service_key: string;
  hosts: string[];
}

export interface TriageDoc {
  hostile: TriageEntry[];
  unknown: TriageEntry[];
  include_known: boolean;
  known?: TriageEntry[];
}

export interface AggregateRow {
  service_key: string;
  display_name: string;
  running: number;
  stopped: number;
  total: number;
  classification: string;
}

export interface ApplicationRow {
  application: string;
  description: string;
  executable_path: string;
  services: string[];
}

export interface ServiceRecordDoc {
  host: string;
  service_key: string;
  display_name: string;
  description: string;
  status: string;
  startup: string;
  logon: string;
  path: string;
  manufacturer: string;
  classification: string;
}

export interface SystemDoc {
  hosts: Record<string, ServiceRecordDoc[]>;
}

export interface ServiceHostsDoc {
  service_key: string;
  running: string[];
  stopped: string[];
}

export interface KbEntryDoc {
  service_key: string;
  verdict: string;
  description: string;
  application: string;
  executable_path: string;
  recommended_startup: string | null;
  note: string;
  updated_at: string | null;
}

// What the classify form submits. Verdict stays a free string here so the
// empty value is representable; validation happens at the form boundary.
export interface ClassifyForm {
  service_key: string;
  verdict: string;
  description: string;
  application: string;
  executable_path: string;
  recommended_startup: string;
}
