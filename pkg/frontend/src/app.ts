// App shell: owns the state, wires the tabs, and talks to the API
// through a FetchGate so slow responses never clobber newer ones.
// Every mutation round-trips through the server and triggers a fresh
// reload; there is no optimistic update anywhere.

import { ApiClient, ApiError } from './api.js';
import { FetchGate } from './seq.js';
import { triageRows } from './triage.js';
import type { ClassifyForm, SystemDoc } from './types.js';
import {
  renderAggregateTable,
  renderApplicationsTable,
  renderBanner,
  renderClassifyForm,
  renderDetail,
  renderHostPicker,
  renderHostTable,
  renderTriageTable,
  renderVanishedNotice,
  setFormError,
} from './view.js';

export type Tab = 'triage' | 'aggregate' | 'apps' | 'hosts';

export const TABS: Array<[Tab, string]> = [
  ['triage', 'Triage'],
  ['aggregate', 'Network aggregate'],
  ['apps', 'Applications'],
  ['hosts', 'Hosts'],
];

interface AppState {
  tab: Tab;
  includeKnown: boolean;
  selectedService: string | null;
  selectedHost: string | null;
}

function readConfig(): { baseUrl: string; token?: string } {
  const params = new URLSearchParams(window.location.search);
  const baseUrl =
    params.get('api') ?? window.localStorage.getItem('svcwatch.api') ?? 'http://127.0.0.1:8787';
  const token = params.get('token') ?? window.localStorage.getItem('svcwatch.token') ?? undefined;
  return { baseUrl, token: token || undefined };
}

export class App {
  private state: AppState = {
    tab: 'triage',
    includeKnown: false,
    selectedService: null,
    selectedHost: null,
  };
  private gate = new FetchGate();

  constructor(
    private api: ApiClient,
    private root: HTMLElement,
  ) {}

  start(): void {
    this.renderChrome();
    void this.refresh();
  }

  private zone(name: string): HTMLElement {
    return this.root.querySelector(`[data-zone="${name}"]`) as HTMLElement;
  }

  private renderChrome(): void {
    this.root.textContent = '';
    const nav = document.createElement('nav');
    for (const [tab, label] of TABS) {
      const button = document.createElement('button');
      button.textContent = label;
      button.dataset.tab = tab;
      button.addEventListener('click', () => {
        this.state.tab = tab;
        void this.refresh();
      });
      nav.appendChild(button);
    }
    const toggle = document.createElement('label');
    toggle.className = 'include-known';
    const box = document.createElement('input');
    box.type = 'checkbox';
    box.addEventListener('change', () => {
      this.state.includeKnown = box.checked;
      void this.refresh();
    });
    toggle.appendChild(box);
    toggle.appendChild(document.createTextNode(' show known'));
    nav.appendChild(toggle);
    this.root.appendChild(nav);

    for (const name of ['banner', 'main', 'side']) {
      const zone = document.createElement('div');
      zone.dataset.zone = name;
      zone.className = `zone-${name}`;
      this.root.appendChild(zone);
    }
  }

  private showBanner(message: string): void {
    const zone = this.zone('banner');
    zone.textContent = '';
    if (message) zone.appendChild(renderBanner(message));
  }

  // Reload the active tab. fresh forces past the in-flight de-dup, used
  // after a mutation so the reload cannot reuse a pre-mutation response.
  async refresh(fresh = false): Promise<void> {
    for (const button of this.root.querySelectorAll('nav button')) {
      button.classList.toggle('active', (button as HTMLElement).dataset.tab === this.state.tab);
    }
    try {
      switch (this.state.tab) {
        case 'triage':
          await this.refreshTriage(fresh);
          break;
        case 'aggregate': {
          const rows = await this.gate.run('aggregate', () => this.api.aggregate(), { fresh });
          if (rows === null) return;
          this.swapMain(renderAggregateTable(rows));
          this.zone('side').textContent = '';
          break;
        }
        case 'apps': {
          const rows = await this.gate.run('apps', () => this.api.applications(), { fresh });
          if (rows === null) return;
          this.swapMain(renderApplicationsTable(rows));
          this.zone('side').textContent = '';
          break;
        }
        case 'hosts': {
          const doc = await this.gate.run('system', () => this.api.system(), { fresh });
          if (doc === null) return;
          this.renderHosts(doc);
          break;
        }
      }
      this.showBanner('');
    } catch (err) {
      // leave the current view stale; just surface the failure
      this.showBanner(describeError(err));
    }
  }

  private async refreshTriage(fresh: boolean): Promise<void> {
    const doc = await this.gate.run(
      `triage:${this.state.includeKnown}`,
      () => this.api.triage(this.state.includeKnown),
      { fresh },
    );
    if (doc === null) return;
    const rows = triageRows(doc);
    if (this.state.selectedService && !rows.some((r) => r.serviceKey === this.state.selectedService)) {
      this.state.selectedService = null;
      this.zone('side').textContent = '';
    }
    this.swapMain(
      renderTriageTable(rows, this.state.selectedService, (key) => void this.selectService(key)),
    );
  }

  private swapMain(content: HTMLElement): void {
    const zone = this.zone('main');
    zone.textContent = '';
    zone.appendChild(content);
  }

  // Selecting a row replaces the side panel: drill-down plus classify form.
  private async selectService(serviceKey: string): Promise<void> {
    this.state.selectedService = serviceKey;
    const side = this.zone('side');
    try {
      const doc = await this.gate.run(`service:${serviceKey}`, () =>
        this.api.serviceHosts(serviceKey),
      );
      if (doc === null || this.state.selectedService !== serviceKey) return;
      side.textContent = '';
      side.appendChild(renderDetail(serviceKey, doc));
      const form = renderClassifyForm(serviceKey, (payload) => void this.classify(form, payload));
      side.appendChild(form);
      await this.refresh();
    } catch (err) {
      if (err instanceof ApiError && err.status === 404) {
        side.textContent = '';
        side.appendChild(renderVanishedNotice(serviceKey));
        this.state.selectedService = null;
        await this.refresh(true);
        return;
      }
      this.showBanner(describeError(err));
    }
  }

  private async classify(form: HTMLFormElement, payload: ClassifyForm): Promise<void> {
    try {
      await this.api.classify(payload);
    } catch (err) {
      setFormError(form, describeError(err));
      return;
    }
    this.state.selectedService = null;
    this.zone('side').textContent = '';
    await this.refresh(true);
  }

  private renderHosts(doc: SystemDoc): void {
    const hosts = Object.keys(doc.hosts);
    if (this.state.selectedHost && !hosts.includes(this.state.selectedHost)) {
      this.state.selectedHost = null;
    }
    this.swapMain(
      renderHostPicker(hosts, this.state.selectedHost, (host) => {
        this.state.selectedHost = host;
        this.renderHosts(doc);
      }),
    );
    const side = this.zone('side');
    side.textContent = '';
    if (this.state.selectedHost) {
      side.appendChild(renderHostTable(doc.hosts[this.state.selectedHost]));
    }
  }
}

export function describeError(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  if (err instanceof Error) return `API unreachable: ${err.message}`;
  return String(err);
}

export function boot(): void {
  const root = document.getElementById('app');
  if (!root) return;
  const app = new App(new ApiClient(readConfig()), root);
  app.start();
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  boot();
}
