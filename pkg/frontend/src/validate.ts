/**
 * Client-side mirror of the server's agent profile checks. The builder form
 * blocks the request when any of these fail. Passing here does not guarantee
 * acceptance: duplicate names are only known server-side.
 */

export const MAX_NAME_LEN = 32;
export const MAX_PERSONA_LEN = 2000;

export const CATEGORIES = ["entertainment", "utility"] as const;

/** Voice styles shipped with the server's default catalog. */
export const VOICE_STYLE_IDS = [
  "warm-female",
  "bright-male",
  "deep-male",
  "soft-female",
  "songful",
] as const;

export interface AgentFormInput {
  name: string;
  persona: string;
  category: string;
  voice_style_id?: string;
}

export interface AgentFormErrors {
  name?: string;
  persona?: string;
  category?: string;
  voice_style_id?: string;
}

export function validateAgentForm(input: AgentFormInput): AgentFormErrors {
  const errors: AgentFormErrors = {};
  const name = input.name.trim();
  if (!name) {
    errors.name = "agent name is empty";
  } else if (name.length > MAX_NAME_LEN) {
    errors.name = `agent name exceeds ${MAX_NAME_LEN} characters`;
  }
  // the server checks the raw length but emptiness after stripping
  if (!input.persona.trim()) {
    errors.persona = "persona is empty";
  } else if (input.persona.length > MAX_PERSONA_LEN) {
    errors.persona = `persona exceeds ${MAX_PERSONA_LEN} characters`;
  }
  if (!(CATEGORIES as readonly string[]).includes(input.category)) {
    errors.category = "category must be entertainment or utility";
  }
  if (
    input.voice_style_id &&
    !(VOICE_STYLE_IDS as readonly string[]).includes(input.voice_style_id)
  ) {
    errors.voice_style_id = "unknown voice style";
  }
  return errors;
}

export function hasErrors(errors: AgentFormErrors): boolean {
  return Object.keys(errors).length > 0;
}
