// Triage view model. The console performs no classification of its own:
// a row's color is purely which block the server put the key in, and the
// order is the server's block order (hostile, unknown, then known).

import type { Color, TriageDoc, TriageEntry } from './types.js';

export interface TriageRow {
  serviceKey: string;
  color: Color;
  hostCount: number;
  hosts: string[];
}

function block(entries: TriageEntry[] | undefined, color: Color): TriageRow[] {
  return (entries ?? []).map((e) => ({
    serviceKey: e.service_key,
    color,
    hostCount: e.hosts.length,
    hosts: e.hosts,
  }));
}

export function triageRows(doc: TriageDoc): TriageRow[] {
  return [
    ...block(doc.hostile, 'red'),
    ...block(doc.unknown, 'yellow'),
    ...block(doc.known, 'green'),
  ];
}
