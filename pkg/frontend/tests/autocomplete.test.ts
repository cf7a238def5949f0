import { describe, expect, it } from "vitest";

import { MAX_SUGGESTIONS, mentionAutocomplete, mentionTokenAt } from "../src/autocomplete.js";
import type { RosterEntry } from "../src/session.js";

function agent(name: string): RosterEntry {
  return { name, kind: "agent" };
}

function human(name: string): RosterEntry {
  return { name, kind: "human" };
}

describe("mentionAutocomplete", () => {
  it("matches case-insensitive prefixes", () => {
    const roster = [agent("DJ Bot"), agent("Django"), human("Sam")];
    expect(mentionAutocomplete("dj", roster)).toEqual(["DJ Bot", "Django"]);
  });

  it("returns the full roster for an empty prefix, truncated to 8", () => {
    const roster = Array.from({ length: 12 }, (_, i) => agent(`Agent ${i}`));
    const names = mentionAutocomplete("", roster);
    expect(names).toHaveLength(MAX_SUGGESTIONS);
    expect(names[0]).toBe("Agent 0");
  });

  it("returns nothing when nothing matches", () => {
    const roster = [agent("DJ Bot"), human("Sam")];
    expect(mentionAutocomplete("zzz", roster)).toEqual([]);
  });

  it("lists agents before humans even when humans sort earlier", () => {
    const roster = [human("Aaron"), agent("Zed")];
    expect(mentionAutocomplete("", roster)).toEqual(["Zed", "Aaron"]);
  });

  it("orders within a kind alphabetically, case-insensitive", () => {
    const roster = [agent("pixel"), agent("Auntie Mei"), agent("DJ Nova")];
    expect(mentionAutocomplete("", roster)).toEqual(["Auntie Mei", "DJ Nova", "pixel"]);
  });

  it("uppercase prefix matches lowercase names", () => {
    expect(mentionAutocomplete("AL", [human("alice")])).toEqual(["alice"]);
  });

  it("caps results after ranking", () => {
    const roster = [
      ...Array.from({ length: 6 }, (_, i) => human(`user${i}`)),
      ...Array.from({ length: 6 }, (_, i) => agent(`ubot${i}`)),
    ];
    const names = mentionAutocomplete("u", roster);
    expect(names).toHaveLength(8);
    // all six agents survive the cut, humans fill the rest
    expect(names.slice(0, 6).every((n) => n.startsWith("ubot"))).toBe(true);
    expect(names.slice(6)).toEqual(["user0", "user1"]);
  });

  it("honors a custom limit", () => {
    const roster = [agent("a1"), agent("a2"), agent("a3")];
    expect(mentionAutocomplete("a", roster, 2)).toEqual(["a1", "a2"]);
  });
});

describe("mentionTokenAt", () => {
  it("finds the token at the caret", () => {
    expect(mentionTokenAt("hi @dj", 6)).toEqual({ start: 3, prefix: "dj" });
  });

  it("allows spaces inside the prefix for multi-word names", () => {
    expect(mentionTokenAt("@dj b", 5)).toEqual({ start: 0, prefix: "dj b" });
  });

  it("returns null without an @", () => {
    expect(mentionTokenAt("plain text", 5)).toBeNull();
  });

  it("ignores an @ glued to a word", () => {
    expect(mentionTokenAt("mail@example", 12)).toBeNull();
  });

  it("handles an @ at the start of the text", () => {
    expect(mentionTokenAt("@", 1)).toEqual({ start: 0, prefix: "" });
  });

  it("only looks before the caret", () => {
    expect(mentionTokenAt("@djX trailing", 3)).toEqual({ start: 0, prefix: "dj" });
  });

  it("gives up across newlines", () => {
    expect(mentionTokenAt("@dj\nmore", 8)).toBeNull();
  });
});
