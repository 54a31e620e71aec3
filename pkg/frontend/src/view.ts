// DOM builders. Pure functions from data to elements; all state lives in
// the app shell. No innerHTML with interpolated data anywhere.

import type { TriageRow } from './triage.js';
import type {
  AggregateRow,
  ApplicationRow,
  ClassifyForm,
  ServiceHostsDoc,
  ServiceRecordDoc,
} from './types.js';

export const COLOR_LABELS: Record<string, string> = {
  red: 'Hostile',
  yellow: 'Unknown',
  green: 'Known',
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function emptyState(message: string): HTMLElement {
  return el('p', 'empty-state', message);
}

export function renderTriageTable(
  rows: TriageRow[],
  selected: string | null,
  onSelect: (serviceKey: string) => void,
): HTMLElement {
  if (rows.length === 0) {
    return emptyState('Nothing to triage: no services observed yet.');
  }
  const table = el('table', 'triage-table');
  const head = el('tr');
  for (const h of ['', 'Service', 'Hosts']) head.appendChild(el('th', undefined, h));
  table.appendChild(head);
  for (const row of rows) {
    const tr = el('tr', `triage-row ${row.color}`);
    if (row.serviceKey === selected) tr.classList.add('selected');
    tr.dataset.serviceKey = row.serviceKey;
    tr.appendChild(el('td', 'badge', COLOR_LABELS[row.color]));
    tr.appendChild(el('td', 'key', row.serviceKey));
    tr.appendChild(el('td', 'count', String(row.hostCount)));
    tr.addEventListener('click', () => onSelect(row.serviceKey));
    table.appendChild(tr);
  }
  return table;
}

export function renderDetail(serviceKey: string, doc: ServiceHostsDoc): HTMLElement {
  const panel = el('div', 'detail-panel');
  panel.appendChild(el('h3', undefined, serviceKey));
  const running = el('div', 'detail-running');
  running.appendChild(el('h4', undefined, `Running on (${doc.running.length})`));
  if (doc.running.length === 0) {
    running.appendChild(emptyState('Not running anywhere right now.'));
  } else {
    const ul = el('ul');
    for (const host of doc.running) ul.appendChild(el('li', undefined, host));
    running.appendChild(ul);
  }
  panel.appendChild(running);
  const stopped = el('div', 'detail-stopped');
  stopped.appendChild(el('h4', undefined, `Stopped on (${doc.stopped.length})`));
  const ul = el('ul');
  for (const host of doc.stopped) ul.appendChild(el('li', undefined, host));
  stopped.appendChild(ul);
  panel.appendChild(stopped);
  return panel;
}

export function renderVanishedNotice(serviceKey: string): HTMLElement {
  const panel = el('div', 'detail-panel');
  panel.appendChild(el('p', 'notice', `Service "${serviceKey}" vanished from the inventory.`));
  return panel;
}

// Classify form. Submitting with an empty verdict never reaches onSubmit;
// the error is shown inline and no request goes out.
export function renderClassifyForm(
  serviceKey: string,
  onSubmit: (form: ClassifyForm) => void,
): HTMLFormElement {
  const form = el('form', 'classify-form') as HTMLFormElement;
  form.appendChild(el('h4', undefined, `Classify "${serviceKey}"`));

  const verdict = el('select') as HTMLSelectElement;
  verdict.name = 'verdict';
  for (const [value, label] of [
    ['', 'pick a verdict'],
    ['Known', 'Known (vetted)'],
    ['Hostile', 'Hostile (remove)'],
  ]) {
    const opt = el('option', undefined, label) as HTMLOptionElement;
    opt.value = value;
    verdict.appendChild(opt);
  }
  form.appendChild(verdict);

  const fields: Array<[keyof ClassifyForm, string]> = [
    ['description', 'description'],
    ['application', 'application'],
    ['executable_path', 'executable path'],
    ['recommended_startup', 'recommended startup'],
  ];
  const inputs = new Map<string, HTMLInputElement>();
  for (const [name, placeholder] of fields) {
    const input = el('input') as HTMLInputElement;
    input.name = name;
    input.placeholder = placeholder;
    inputs.set(name, input);
    form.appendChild(input);
  }

  const error = el('p', 'form-error');
  form.appendChild(error);
  const submit = el('button', undefined, 'Classify') as HTMLButtonElement;
  submit.type = 'submit';
  form.appendChild(submit);

  form.addEventListener('submit', (ev) => {
    ev.preventDefault();
    if (verdict.value === '') {
      error.textContent = 'Pick a verdict first.';
      return;
    }
    error.textContent = '';
    onSubmit({
      service_key: serviceKey,
      verdict: verdict.value,
      description: inputs.get('description')!.value,
      application: inputs.get('application')!.value,
      executable_path: inputs.get('executable_path')!.value,
      recommended_startup: inputs.get('recommended_startup')!.value,
    });
  });
  return form;
}

export function setFormError(form: HTMLFormElement, message: string): void {
  const error = form.querySelector('.form-error');
  if (error) error.textContent = message;
}

export function renderAggregateTable(rows: AggregateRow[]): HTMLElement {
  if (rows.length === 0) return emptyState('No services observed yet.');
  const table = el('table', 'aggregate-table');
  const head = el('tr');
  for (const h of ['Service', 'Display name', 'Running', 'Stopped', 'Total', 'Classification']) {
    head.appendChild(el('th', undefined, h));
  }
  table.appendChild(head);
  for (const row of rows) {
    const tr = el('tr', row.classification.toLowerCase());
    tr.appendChild(el('td', 'key', row.service_key));
    tr.appendChild(el('td', undefined, row.display_name));
    tr.appendChild(el('td', 'num', String(row.running)));
    tr.appendChild(el('td', 'num', String(row.stopped)));
    tr.appendChild(el('td', 'num', String(row.total)));
    tr.appendChild(el('td', undefined, row.classification));
    table.appendChild(tr);
  }
  return table;
}

export function renderApplicationsTable(rows: ApplicationRow[]): HTMLElement {
  if (rows.length === 0) return emptyState('No application suites in the knowledge base yet.');
  const table = el('table', 'apps-table');
  const head = el('tr');
  for (const h of ['Application', 'Description', 'Path', 'Services']) {
    head.appendChild(el('th', undefined, h));
  }
  table.appendChild(head);
  for (const row of rows) {
    const tr = el('tr');
    tr.appendChild(el('td', undefined, row.application));
    tr.appendChild(el('td', undefined, row.description));
    tr.appendChild(el('td', 'path', row.executable_path));
    tr.appendChild(el('td', undefined, row.services.join(', ')));
    table.appendChild(tr);
  }
  return table;
}

export function renderHostPicker(
  hosts: string[],
  selected: string | null,
  onSelect: (host: string) => void,
): HTMLElement {
  if (hosts.length === 0) return emptyState('No hosts ingested yet.');
  const list = el('ul', 'host-picker');
  for (const host of hosts) {
    const li = el('li', host === selected ? 'selected' : undefined, host);
    li.addEventListener('click', () => onSelect(host));
    list.appendChild(li);
  }
  return list;
}

export function renderHostTable(records: ServiceRecordDoc[]): HTMLElement {
  if (records.length === 0) return emptyState('No services recorded for this host.');
  const table = el('table', 'host-table');
  const head = el('tr');
  for (const h of ['Service', 'Display name', 'Status', 'Startup', 'Log on as', 'Classification']) {
    head.appendChild(el('th', undefined, h));
  }
  table.appendChild(head);
  for (const rec of records) {
    const tr = el('tr', rec.classification.toLowerCase());
    tr.appendChild(el('td', 'key', rec.service_key));
    tr.appendChild(el('td', undefined, rec.display_name));
    tr.appendChild(el('td', undefined, rec.status));
    tr.appendChild(el('td', undefined, rec.startup));
    tr.appendChild(el('td', undefined, rec.logon));
    tr.appendChild(el('td', undefined, rec.classification));
    table.appendChild(tr);
  }
  return table;
}

export function renderBanner(message: string): HTMLElement {
  return el('div', 'banner', message);
}
