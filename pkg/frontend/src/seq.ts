// Request discipline for a single-event-loop UI: de-duplicate concurrent
// fetches per endpoint key, and discard responses that a newer request
// for the same key has made stale. A discarded response resolves to null
// so callers can simply skip rendering it.

type Loader<T> = () => Promise<T>;

export class FetchGate {
  private seq = new Map<string, number>();
  private inflight = new Map<string, Promise<unknown>>();

  // fresh: true skips de-duplication and supersedes any outstanding
  // request for the key (used right after a mutation).
  run<T>(key: string, load: Loader<T>, opts?: { fresh?: boolean }): Promise<T | null> {
    if (!opts?.fresh) {
      const current = this.inflight.get(key);
      if (current) return current as Promise<T | null>;
    }
    const mine = (this.seq.get(key) ?? 0) + 1;
    this.seq.set(key, mine);
    const p: Promise<T | null> = load().then(
      (value) => (this.seq.get(key) === mine ? value : null),
      (err) => {
        if (this.seq.get(key) === mine) throw err;
        return null;
      },
    );
    const tracked = p.finally(() => {
      if (this.inflight.get(key) === tracked) this.inflight.delete(key);
    });
    this.inflight.set(key, tracked);
    return tracked;
  }
}
