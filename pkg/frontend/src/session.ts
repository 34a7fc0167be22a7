import type { Override } from "./types.js";

/**
 * What-if session state for one base scenario.
 *
 * Requests are numbered with a strictly increasing sequence; a response is
 * applied only when its sequence number is higher than the last applied
 * one, so a slow early response can never overwrite a newer result.
 * Overrides are pending edits against the immutable base config; the base
 * itself is never mutated (the service applies overrides to a copy).
 */
export class WhatIfSession<S = unknown> {
  private seq = 0;
  private appliedSeq = 0;
  private overrides = new Map<string, number>();
  private lastSnapshot: S | null = null;

  constructor(readonly baseId: string) {}

  /** Allocate the sequence number for the request about to be sent. */
  nextSeq(): number {
    this.seq += 1;
    return this.seq;
  }

  /** Apply a response if it is newer than everything applied so far. */
  accept(seq: number, snapshot: S): boolean {
    if (seq <= this.appliedSeq) {
      return false;
    }
    this.appliedSeq = seq;
    this.lastSnapshot = snapshot;
    return true;
  }

  get snapshot(): S | null {
    return this.lastSnapshot;
  }

  get lastAppliedSeq(): number {
    return this.appliedSeq;
  }

  setOverride(path: string, value: number): void {
    this.overrides.set(path, value);
  }

  clearOverride(path: string): void {
    this.overrides.delete(path);
  }

  clearOverrides(): void {
    this.overrides.clear();
  }

  get pendingOverrides(): Override[] {
    return [...this.overrides.entries()].map(([path, value]) => ({ path, value }));
  }
}
