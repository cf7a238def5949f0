/** Wire shapes for the chat server's JSON API and NDJSON event stream. */

export type Category = "entertainment" | "utility";

export interface AgentProfileDto {
  agent_id: string;
  name: string;
  persona: string;
  category: Category;
  creator_id: string;
  created_at: number;
  greeting: string | null;
  voice_style_id: string | null;
}

export interface MessageDto {
  msg_id: string;
  group_id: string;
  seq: number;
  sender: string;
  body: string;
  ts: number;
  reply_to: string | null;
}

/**
 * One line of the event stream, identical to a stored log line. StreamClosed
 * frames carry only event_type and group_id; every stored event also has
 * seq, payload, and ts.
 */
export interface EventFrame {
  event_type: string;
  group_id: string;
  seq?: number;
  payload?: Record<string, unknown>;
  ts?: number;
}

export interface PostMessageResult {
  message: MessageDto;
  replies: MessageDto[];
}

export interface PluginResultDto {
  kind: string;
  text: string | null;
  audio_ref: string | null;
  metadata: Record<string, unknown>;
}
