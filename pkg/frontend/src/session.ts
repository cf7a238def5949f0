/**
 * Client-side view state: who we are, which group is active, the roster used
 * for mention autocomplete, and how far into each group's event stream we
 * have seen.
 */

import type { MessageDto } from "./types.js";

export type RosterKind = "agent" | "human";

export interface RosterEntry {
  name: string;
  kind: RosterKind;
  category?: string;
}

export class ClientSession {
  activeGroupId: string | null = null;
  // group id -> lowered name -> entry; lowered keys make re-adds idempotent
  private readonly rosters = new Map<string, Map<string, RosterEntry>>();
  private readonly lastSeen = new Map<string, number>();
  // agent replies arrive with the agent id as sender; map back to the name
  private readonly agentNames = new Map<string, Map<string, string>>();

  constructor(readonly userId: string) {}

  /** Highest event seq delivered for the group; 0 before anything arrived. */
  lastSeenSeq(groupId: string): number {
    return this.lastSeen.get(groupId) ?? 0;
  }

  /**
   * Record a delivered event seq. The mark never moves backwards, so a
   * duplicate or stale delivery cannot make a reconnect re-request events
   * the view already rendered.
   */
  advanceSeq(groupId: string, seq: number): void {
    if (!Number.isInteger(seq) || seq < 1) return;
    const current = this.lastSeen.get(groupId) ?? 0;
    if (seq > current) {
      this.lastSeen.set(groupId, seq);
    }
  }

  addRosterEntry(groupId: string, entry: RosterEntry): void {
    let roster = this.rosters.get(groupId);
    if (!roster) {
      roster = new Map();
      this.rosters.set(groupId, roster);
    }
    roster.set(entry.name.toLowerCase(), entry);
  }

  recordAgentId(groupId: string, agentId: string, name: string): void {
    let names = this.agentNames.get(groupId);
    if (!names) {
      names = new Map();
      this.agentNames.set(groupId, names);
    }
    names.set(agentId, name);
  }

  /** Display name for a message sender; unknown senders pass through. */
  displayName(groupId: string, sender: string): string {
    return this.agentNames.get(groupId)?.get(sender) ?? sender;
  }

  roster(groupId: string): RosterEntry[] {
    const entries = this.rosters.get(groupId);
    return entries ? [...entries.values()] : [];
  }

  activeRoster(): RosterEntry[] {
    return this.activeGroupId ? this.roster(this.activeGroupId) : [];
  }
}

/**
 * Orders messages for rendering. Arrival jitter and reconnect overlap both
 * happen in practice, so the timeline buffers ahead-of-order messages and
 * drops seqs it already released. Released order is exactly seq order, each
 * seq released once.
 */
export class MessageTimeline {
  private nextSeq = 1;
  private readonly pending = new Map<number, MessageDto>();

  /** Accept one message; return every message that just became renderable. */
  ingest(message: MessageDto): MessageDto[] {
    if (message.seq < this.nextSeq) {
      return [];
    }
    this.pending.set(message.seq, message);
    const ready: MessageDto[] = [];
    while (true) {
      const next = this.pending.get(this.nextSeq);
      if (!next) {
        break;
      }
      this.pending.delete(this.nextSeq);
      this.nextSeq += 1;
      ready.push(next);
    }
    return ready;
  }

  /** Highest message seq released so far. */
  get renderedThrough(): number {
    return this.nextSeq - 1;
  }
}
