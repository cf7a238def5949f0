/**
 * Ranked @-mention suggestions: case-insensitive prefix matches over the
 * roster, agents ahead of humans, capped at eight entries.
 */

import type { RosterEntry } from "./session.js";

export const MAX_SUGGESTIONS = 8;

export function mentionAutocomplete(
  prefix: string,
  roster: RosterEntry[],
  limit = MAX_SUGGESTIONS,
): string[] {
  const needle = prefix.toLowerCase();
  const matches = roster.filter((entry) =>
    entry.name.toLowerCase().startsWith(needle),
  );
  matches.sort((a, b) => {
    if (a.kind !== b.kind) {
      return a.kind === "agent" ? -1 : 1;
    }
    const an = a.name.toLowerCase();
    const bn = b.name.toLowerCase();
    return an < bn ? -1 : an > bn ? 1 : 0;
  });
  return matches.slice(0, Math.max(0, limit)).map((entry) => entry.name);
}

export interface MentionToken {
  /** Offset of the "@" in the text. */
  start: number;
  /** Everything between the "@" and the caret. */
  prefix: string;
}

/**
 * The "@" token under the caret, or null when the caret is not inside one.
 * Names may contain spaces, so the prefix runs all the way to the caret; an
 * "@" glued to the end of a word is not a mention.
 */
export function mentionTokenAt(text: string, caret: number): MentionToken | null {
  const upto = text.slice(0, caret);
  const at = upto.lastIndexOf("@");
  if (at === -1) {
    return null;
  }
  if (at > 0 && !/\s/.test(upto.charAt(at - 1))) {
    return null;
  }
  const prefix = upto.slice(at + 1);
  if (prefix.includes("\n")) {
    return null;
  }
  return { start: at, prefix };
}
