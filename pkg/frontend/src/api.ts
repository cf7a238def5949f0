/**
 * Typed client for the chat server's REST endpoints.
 *
 * Each method maps one-to-one onto a documented endpoint; the client never
 * invents writes of its own. Server errors arrive as {error, detail} JSON
 * and are rethrown as ApiError so callers can surface the detail inline.
 */

import type {
  AgentProfileDto,
  MessageDto,
  PluginResultDto,
  PostMessageResult,
} from "./types.js";

export type FetchFn = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly detail: string,
  ) {
    super(`${code}: ${detail}`);
    this.name = "ApiError";
  }
}

export interface CreateAgentInput {
  name: string;
  persona: string;
  category: string;
  creator_id?: string;
  greeting?: string | null;
  voice_style_id?: string | null;
}

export interface PluginCallInput {
  text?: string | null;
  audio_ref?: string | null;
  voice_style_id?: string | null;
  group_id?: string | null;
}

/** Everything the UI needs from the server; tests substitute fakes. */
export interface Api {
  createAgent(input: CreateAgentInput): Promise<AgentProfileDto>;
  listAgents(category?: string): Promise<AgentProfileDto[]>;
  createGroup(): Promise<string>;
  joinGroup(groupId: string, userId: string): Promise<string[]>;
  attachAgent(groupId: string, agentId: string): Promise<string[]>;
  postMessage(
    groupId: string,
    sender: string,
    body: string,
    replyTo?: string,
  ): Promise<PostMessageResult>;
  getMessages(groupId: string, fromSeq?: number): Promise<MessageDto[]>;
  recordView(groupId: string, userId: string, msgId: string): Promise<void>;
  callPlugin(kind: string, input: PluginCallInput): Promise<PluginResultDto>;
}

export class ApiClient implements Api {
  readonly baseUrl: string;
  private readonly fetchFn: FetchFn;

  constructor(baseUrl: string, fetchFn?: FetchFn) {
    // a trailing slash would double up when paths are appended
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  async createAgent(input: CreateAgentInput): Promise<AgentProfileDto> {
    return this.request<AgentProfileDto>("POST", "/agents", input);
  }

  async listAgents(category?: string): Promise<AgentProfileDto[]> {
    const query = category ? `?category=${encodeURIComponent(category)}` : "";
    const data = await this.request<{ agents: AgentProfileDto[] }>(
      "GET",
      `/agents${query}`,
    );
    return data.agents;
  }

  async createGroup(): Promise<string> {
    const data = await this.request<{ group_id: string }>("POST", "/groups");
    return data.group_id;
  }

  async joinGroup(groupId: string, userId: string): Promise<string[]> {
    const data = await this.request<{ members: string[] }>(
      "POST",
      `/groups/${encodeURIComponent(groupId)}/join`,
      { user_id: userId },
    );
    return data.members;
  }

  async attachAgent(groupId: string, agentId: string): Promise<string[]> {
    const data = await this.request<{ agents: string[] }>(
      "POST",
      `/groups/${encodeURIComponent(groupId)}/agents/${encodeURIComponent(agentId)}`,
    );
    return data.agents;
  }

  async postMessage(
    groupId: string,
    sender: string,
    body: string,
    replyTo?: string,
  ): Promise<PostMessageResult> {
    return this.request<PostMessageResult>(
      "POST",
      `/groups/${encodeURIComponent(groupId)}/messages`,
      { sender, body, reply_to: replyTo ?? null },
    );
  }

  async getMessages(groupId: string, fromSeq = 1): Promise<MessageDto[]> {
    const data = await this.request<{ messages: MessageDto[] }>(
      "GET",
      `/groups/${encodeURIComponent(groupId)}/messages?from_seq=${fromSeq}`,
    );
    return data.messages;
  }

  async recordView(groupId: string, userId: string, msgId: string): Promise<void> {
    await this.request<{ ok: boolean }>(
      "POST",
      `/groups/${encodeURIComponent(groupId)}/views`,
      { user_id: userId, msg_id: msgId },
    );
  }

  async callPlugin(kind: string, input: PluginCallInput): Promise<PluginResultDto> {
    return this.request<PluginResultDto>(
      "POST",
      `/plugins/${encodeURIComponent(kind)}`,
      input,
    );
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchFn(this.baseUrl + path, init);
    const text = await response.text();
    if (!response.ok) {
      let code = `HTTP ${response.status}`;
      let detail = text.slice(0, 200);
      try {
        const parsed = JSON.parse(text) as { error?: unknown; detail?: unknown };
        if (typeof parsed.error === "string") {
          code = parsed.error;
          detail = typeof parsed.detail === "string" ? parsed.detail : "";
        }
      } catch {
        // non-JSON error body, keep the raw snippet
      }
      throw new ApiError(response.status, code, detail);
    }
    return (text ? JSON.parse(text) : null) as T;
  }
}
