/**
 * DOM shell for the chat client: a chat room with live agent replies, the
 * agent builder form, the agent square, and a plugin panel. No framework;
 * panels are plain sections and rendering is a handful of direct helpers.
 *
 * All server writes go through the Api interface. Events come back over the
 * group's NDJSON stream, so nothing is drawn optimistically: a posted message
 * appears when its MessagePosted frame does.
 */

import type { Api } from "./api.js";
import { ApiError } from "./api.js";
import { mentionAutocomplete, mentionTokenAt, type MentionToken } from "./autocomplete.js";
import { ClientSession, MessageTimeline, type RosterKind } from "./session.js";
import type { ConnectionState, EventStream, EventStreamHandlers } from "./stream.js";
import type { AgentProfileDto, EventFrame, MessageDto } from "./types.js";
import { VOICE_STYLE_IDS, hasErrors, validateAgentForm } from "./validate.js";

export type StreamHandle = Pick<EventStream, "start" | "stop" | "restart" | "resumeFrom">;

export type StreamFactory = (
  groupId: string,
  fromSeq: number,
  handlers: EventStreamHandlers,
) => StreamHandle;

interface TimelineEntry {
  kind: "message" | "note";
  seq: number; // message seq for messages, event seq for notes
  senderKind: RosterKind | null;
  message: MessageDto | null;
  note: string | null;
}

/** Per-group render state. Kept across group switches so nothing re-renders. */
class GroupView {
  readonly timeline = new MessageTimeline();
  readonly seenEvents = new Set<number>();
  readonly entries: TimelineEntry[] = [];
  readonly pendingKind = new Map<number, RosterKind>();
}

const PANELS = ["chat", "builder", "square", "plugins"] as const;
type PanelName = (typeof PANELS)[number];

export class App {
  private root!: HTMLElement;
  private doc!: Document;
  private stream: StreamHandle | null = null;
  private readonly views = new Map<string, GroupView>();
  private catalog: AgentProfileDto[] = [];
  private squareFilter: "all" | "entertainment" | "utility" = "all";
  private freshAgentId: string | null = null;
  private mentionToken: MentionToken | null = null;

  constructor(
    private readonly api: Api,
    readonly session: ClientSession,
    private readonly makeStream: StreamFactory,
  ) {}

  mount(root: HTMLElement, baseLabel = ""): void {
    this.root = root;
    this.doc = root.ownerDocument;
    root.innerHTML = this.template();
    this.el("base-url").textContent = baseLabel;
    this.bind();
    this.showPanel("chat");
    void this.refreshCatalog();
  }

  /** Stop the live stream; safe to call more than once. */
  dispose(): void {
    this.stream?.stop();
    this.stream = null;
  }

  /** Drop the current stream connection and resume from the last seen seq. */
  reconnect(): void {
    this.stream?.restart();
  }

  // -- layout ------------------------------------------------------------

  private template(): string {
    const voiceOptions = VOICE_STYLE_IDS.map(
      (id) => `<option value="${id}">${id}</option>`,
    ).join("");
    return `
<header>
  <h1>gcagent chat</h1>
  <span id="base-url" class="muted"></span>
  <nav>
    <button id="nav-chat" data-panel="chat">Chat</button>
    <button id="nav-builder" data-panel="builder">Agent Builder</button>
    <button id="nav-square" data-panel="square">Agent Square</button>
    <button id="nav-plugins" data-panel="plugins">Plugins</button>
  </nav>
  <span id="conn-state" data-state="idle">idle</span>
</header>
<section id="panel-chat" class="panel">
  <div class="group-bar">
    <button id="new-group">New group</button>
    <input id="group-id-input" placeholder="group id" />
    <button id="join-group">Join</button>
    <button id="reconnect" title="drop and resume the event stream">Reconnect</button>
    <span id="group-label" class="muted">no group</span>
  </div>
  <p id="chat-error" class="error" hidden></p>
  <ul id="timeline"></ul>
  <div class="composer-row">
    <input id="composer" placeholder="message the group, @ to mention" disabled />
    <button id="send" disabled>Send</button>
  </div>
  <ul id="mention-menu" hidden></ul>
</section>
<section id="panel-builder" class="panel" hidden>
  <form id="builder-form" novalidate>
    <label>Name <input id="agent-name" /></label>
    <span class="field-error" id="err-name"></span>
    <label>Persona <textarea id="agent-persona"></textarea></label>
    <span class="field-error" id="err-persona"></span>
    <label>Category
      <select id="agent-category">
        <option value="entertainment">entertainment</option>
        <option value="utility">utility</option>
      </select>
    </label>
    <span class="field-error" id="err-category"></span>
    <label>Greeting <input id="agent-greeting" /></label>
    <label>Voice
      <select id="agent-voice"><option value="">none</option>${voiceOptions}</select>
    </label>
    <span class="field-error" id="err-voice"></span>
    <button type="submit" id="builder-submit">Create agent</button>
    <p id="builder-status"></p>
  </form>
</section>
<section id="panel-square" class="panel" hidden>
  <div id="square-tabs">
    <button data-category="all" class="active">All</button>
    <button data-category="entertainment">Entertainment</button>
    <button data-category="utility">Utility</button>
  </div>
  <p id="square-status" class="muted"></p>
  <ul id="square-list"></ul>
</section>
<section id="panel-plugins" class="panel" hidden>
  <div class="plugin-form">
    <select id="plugin-kind">
      <option value="tts">tts</option>
      <option value="ttsing">ttsing</option>
      <option value="asr">asr</option>
    </select>
    <input id="plugin-text" placeholder="text to synthesize" />
    <select id="plugin-voice"><option value="">default voice</option>${voiceOptions}</select>
    <textarea id="plugin-audio-ref" placeholder="audio blob for asr" hidden></textarea>
    <button id="plugin-send">Send</button>
  </div>
  <p id="plugin-error" class="error" hidden></p>
  <div id="plugin-result"></div>
</section>`;
  }

  private bind(): void {
    for (const panel of PANELS) {
      this.el(`nav-${panel}`).addEventListener("click", () => this.showPanel(panel));
    }
    this.el("new-group").addEventListener("click", () => {
      void this.createAndJoinGroup();
    });
    this.el("join-group").addEventListener("click", () => {
      const gid = this.el<HTMLInputElement>("group-id-input").value.trim();
      if (gid) {
        void this.joinGroup(gid);
      }
    });
    this.el("reconnect").addEventListener("click", () => this.reconnect());

    const composer = this.el<HTMLInputElement>("composer");
    composer.addEventListener("input", () => this.updateMentionMenu());
    composer.addEventListener("keydown", (event) => {
      if ((event as KeyboardEvent).key === "Enter") {
        event.preventDefault();
        void this.sendMessage();
      }
    });
    this.el("send").addEventListener("click", () => {
      void this.sendMessage();
    });
    this.el("mention-menu").addEventListener("click", (event) => {
      const target = (event.target as HTMLElement).closest("li[data-name]");
      const name = target instanceof HTMLElement ? target.dataset["name"] : undefined;
      if (name) {
        this.applyMention(name);
      }
    });

    this.el("builder-form").addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submitBuilder();
    });

    this.el("square-tabs").addEventListener("click", (event) => {
      const target = (event.target as HTMLElement).closest("button[data-category]");
      const category = target instanceof HTMLElement ? target.dataset["category"] : undefined;
      if (category === "all" || category === "entertainment" || category === "utility") {
        this.squareFilter = category;
        this.renderSquare();
      }
    });
    this.el("square-list").addEventListener("click", (event) => {
      const target = (event.target as HTMLElement).closest("button.attach");
      const agentId = target instanceof HTMLElement ? target.dataset["agentId"] : undefined;
      if (agentId && !(target as HTMLButtonElement).disabled) {
        void this.attachFromSquare(agentId);
      }
    });

    this.el<HTMLSelectElement>("plugin-kind").addEventListener("change", () =>
      this.renderPluginFields(),
    );
    this.el("plugin-send").addEventListener("click", () => {
      void this.callPlugin();
    });
  }

  private showPanel(name: PanelName): void {
    for (const panel of PANELS) {
      this.el(`panel-${panel}`).hidden = panel !== name;
      this.el(`nav-${panel}`).classList.toggle("active", panel === name);
    }
  }

  private el<T extends HTMLElement = HTMLElement>(id: string): T {
    const found = this.root.querySelector<T>(`#${id}`);
    if (!found) {
      throw new Error(`missing element #${id}`);
    }
    return found;
  }

  // -- chat ----------------------------------------------------------------

  private async createAndJoinGroup(): Promise<void> {
    try {
      const gid = await this.api.createGroup();
      await this.joinGroup(gid);
    } catch (error) {
      this.showChatError(error);
    }
  }

  async joinGroup(groupId: string): Promise<void> {
    this.clearChatError();
    try {
      await this.api.joinGroup(groupId, this.session.userId);
    } catch (error) {
      this.showChatError(error);
      return;
    }
    this.session.activeGroupId = groupId;
    if (!this.views.has(groupId)) {
      this.views.set(groupId, new GroupView());
    }
    this.el("group-label").textContent = groupId;
    this.el<HTMLInputElement>("group-id-input").value = groupId;
    this.el<HTMLInputElement>("composer").disabled = false;
    this.el<HTMLButtonElement>("send").disabled = false;
    this.renderTimeline();
    this.renderSquare(); // attach buttons come alive with a group

    // resume from wherever this group's stream last left off
    this.stream?.stop();
    this.stream = this.makeStream(groupId, this.session.lastSeenSeq(groupId) + 1, {
      onEvent: (frame) => this.handleFrame(frame),
      onState: (state) => this.renderConnState(state),
    });
    this.stream.start();
  }

  private handleFrame(frame: EventFrame): void {
    if (frame.event_type === "StreamClosed") {
      const view = this.activeView();
      if (view) {
        this.pushNote(view, 0, "event stream closed by server");
        this.renderTimeline();
      }
      return;
    }
    const gid = frame.group_id;
    const view = this.views.get(gid);
    if (!view || typeof frame.seq !== "number") {
      return;
    }
    if (view.seenEvents.has(frame.seq)) {
      return; // duplicate delivery; already rendered
    }
    view.seenEvents.add(frame.seq);
    this.session.advanceSeq(gid, frame.seq);

    const payload = frame.payload ?? {};
    switch (frame.event_type) {
      case "GroupCreated":
        this.pushNote(view, frame.seq, "group created");
        break;
      case "ParticipantJoined": {
        const userId = typeof payload["user_id"] === "string" ? payload["user_id"] : "";
        if (userId) {
          this.session.addRosterEntry(gid, { name: userId, kind: "human" });
        }
        this.pushNote(view, frame.seq, `${userId || "someone"} joined`);
        break;
      }
      case "AgentAttached": {
        const name = typeof payload["name"] === "string" ? payload["name"] : "";
        const agentId = typeof payload["agent_id"] === "string" ? payload["agent_id"] : "";
        const category =
          typeof payload["category"] === "string" ? payload["category"] : undefined;
        if (name) {
          this.session.addRosterEntry(gid, { name, kind: "agent", category });
          if (agentId) {
            this.session.recordAgentId(gid, agentId, name);
          }
        }
        this.pushNote(view, frame.seq, `agent ${name || "?"} joined the room`);
        break;
      }
      case "MessagePosted":
        this.pushMessage(view, payload["message"], "human");
        break;
      case "AgentReplied":
        this.pushMessage(view, payload["message"], "agent");
        break;
      case "PluginInvoked": {
        const kind = typeof payload["kind"] === "string" ? payload["kind"] : "plugin";
        this.pushNote(view, frame.seq, `${kind} ${payload["ok"] ? "succeeded" : "failed"}`);
        break;
      }
      default:
        break; // MessageViewed and future event types draw nothing
    }
    if (gid === this.session.activeGroupId) {
      this.renderTimeline();
    }
  }

  private pushMessage(view: GroupView, raw: unknown, kind: RosterKind): void {
    if (!raw || typeof raw !== "object") {
      return;
    }
    const message = raw as MessageDto;
    if (typeof message.seq !== "number") {
      return;
    }
    view.pendingKind.set(message.seq, kind);
    for (const released of view.timeline.ingest(message)) {
      const senderKind = view.pendingKind.get(released.seq) ?? "human";
      view.pendingKind.delete(released.seq);
      view.entries.push({
        kind: "message",
        seq: released.seq,
        senderKind,
        message: released,
        note: null,
      });
    }
  }

  private pushNote(view: GroupView, seq: number, note: string): void {
    view.entries.push({ kind: "note", seq, senderKind: null, message: null, note });
  }

  private activeView(): GroupView | null {
    const gid = this.session.activeGroupId;
    return gid ? (this.views.get(gid) ?? null) : null;
  }

  private renderTimeline(): void {
    const list = this.el("timeline");
    list.innerHTML = "";
    const view = this.activeView();
    if (!view) {
      return;
    }
    for (const entry of view.entries) {
      const item = this.doc.createElement("li");
      if (entry.kind === "note") {
        item.className = "sys";
        item.textContent = entry.note ?? "";
      } else if (entry.message) {
        item.className = `msg ${entry.senderKind ?? "human"}`;
        item.dataset["seq"] = String(entry.seq);
        const sender = this.doc.createElement("span");
        sender.className = "sender";
        sender.textContent = this.session.displayName(
          entry.message.group_id,
          entry.message.sender,
        );
        const body = this.doc.createElement("span");
        body.className = "body";
        body.textContent = entry.message.body;
        item.append(sender, body);
      }
      list.append(item);
    }
  }

  private renderConnState(state: ConnectionState): void {
    const badge = this.el("conn-state");
    badge.textContent = state;
    badge.dataset["state"] = state;
  }

  private async sendMessage(): Promise<void> {
    const gid = this.session.activeGroupId;
    const composer = this.el<HTMLInputElement>("composer");
    if (!gid || !composer.value.trim()) {
      return;
    }
    const send = this.el<HTMLButtonElement>("send");
    send.disabled = true;
    this.clearChatError();
    try {
      await this.api.postMessage(gid, this.session.userId, composer.value);
      composer.value = "";
      this.hideMentionMenu();
    } catch (error) {
      this.showChatError(error);
    } finally {
      send.disabled = false;
    }
  }

  private updateMentionMenu(): void {
    const composer = this.el<HTMLInputElement>("composer");
    const caret = composer.selectionStart ?? composer.value.length;
    const token = mentionTokenAt(composer.value, caret);
    if (!token) {
      this.hideMentionMenu();
      return;
    }
    const names = mentionAutocomplete(token.prefix, this.session.activeRoster());
    if (names.length === 0) {
      this.hideMentionMenu();
      return;
    }
    this.mentionToken = token;
    const menu = this.el("mention-menu");
    menu.innerHTML = "";
    for (const name of names) {
      const item = this.doc.createElement("li");
      item.dataset["name"] = name;
      item.textContent = name;
      menu.append(item);
    }
    menu.hidden = false;
  }

  private applyMention(name: string): void {
    const token = this.mentionToken;
    const composer = this.el<HTMLInputElement>("composer");
    if (!token) {
      return;
    }
    const caret = composer.selectionStart ?? composer.value.length;
    composer.value =
      composer.value.slice(0, token.start) + "@" + name + " " + composer.value.slice(caret);
    this.hideMentionMenu();
    composer.focus();
  }

  private hideMentionMenu(): void {
    const menu = this.el("mention-menu");
    menu.hidden = true;
    menu.innerHTML = "";
    this.mentionToken = null;
  }

  private showChatError(error: unknown): void {
    const box = this.el("chat-error");
    box.textContent = describeError(error);
    box.hidden = false;
  }

  private clearChatError(): void {
    const box = this.el("chat-error");
    box.textContent = "";
    box.hidden = true;
  }

  // -- agent builder ---------------------------------------------------------

  private async submitBuilder(): Promise<void> {
    const name = this.el<HTMLInputElement>("agent-name").value;
    const persona = this.el<HTMLTextAreaElement>("agent-persona").value;
    const category = this.el<HTMLSelectElement>("agent-category").value;
    const greeting = this.el<HTMLInputElement>("agent-greeting").value;
    const voice = this.el<HTMLSelectElement>("agent-voice").value;

    this.el("builder-status").textContent = "";
    const errors = validateAgentForm({
      name,
      persona,
      category,
      voice_style_id: voice || undefined,
    });
    this.renderBuilderErrors(errors);
    if (hasErrors(errors)) {
      return; // invalid form, nothing sent
    }
    try {
      const profile = await this.api.createAgent({
        name: name.trim(),
        persona,
        category,
        creator_id: this.session.userId,
        greeting: greeting.trim() ? greeting : null,
        voice_style_id: voice || null,
      });
      this.el<HTMLFormElement>("builder-form").reset();
      this.el("builder-status").textContent = `created ${profile.name}`;
      this.freshAgentId = profile.agent_id;
      this.squareFilter = profile.category;
      await this.refreshCatalog();
      this.showPanel("square");
    } catch (error) {
      this.renderBuilderServerError(error);
    }
  }

  private renderBuilderErrors(errors: ReturnType<typeof validateAgentForm>): void {
    this.el("err-name").textContent = errors.name ?? "";
    this.el("err-persona").textContent = errors.persona ?? "";
    this.el("err-category").textContent = errors.category ?? "";
    this.el("err-voice").textContent = errors.voice_style_id ?? "";
  }

  private renderBuilderServerError(error: unknown): void {
    if (error instanceof ApiError) {
      if (error.code === "InvalidName") {
        this.el("err-name").textContent = error.detail;
        return;
      }
      if (error.code === "InvalidPersona") {
        this.el("err-persona").textContent = error.detail;
        return;
      }
      if (error.code === "UnknownVoiceStyle") {
        this.el("err-voice").textContent = error.detail;
        return;
      }
      if (error.code === "ValueError") {
        this.el("err-category").textContent = error.detail;
        return;
      }
    }
    this.el("builder-status").textContent = describeError(error);
  }

  // -- agent square ----------------------------------------------------------

  private async refreshCatalog(): Promise<void> {
    try {
      this.catalog = await this.api.listAgents();
    } catch (error) {
      this.el("square-status").textContent = describeError(error);
      return;
    }
    this.renderSquare();
  }

  private renderSquare(): void {
    for (const button of this.el("square-tabs").querySelectorAll("button")) {
      button.classList.toggle(
        "active",
        button.dataset["category"] === this.squareFilter,
      );
    }
    const shown =
      this.squareFilter === "all"
        ? this.catalog
        : this.catalog.filter((profile) => profile.category === this.squareFilter);
    const list = this.el("square-list");
    list.innerHTML = "";
    for (const profile of shown) {
      const card = this.doc.createElement("li");
      card.className = "agent-card" + (profile.agent_id === this.freshAgentId ? " fresh" : "");
      card.dataset["agentId"] = profile.agent_id;
      card.dataset["name"] = profile.name;

      const nameEl = this.doc.createElement("span");
      nameEl.className = "agent-name";
      nameEl.textContent = profile.name;
      const categoryEl = this.doc.createElement("span");
      categoryEl.className = "agent-category";
      categoryEl.textContent = profile.category;
      const personaEl = this.doc.createElement("p");
      personaEl.className = "agent-persona";
      personaEl.textContent =
        profile.persona.length > 140 ? profile.persona.slice(0, 140) + "…" : profile.persona;

      const attach = this.doc.createElement("button");
      attach.className = "attach";
      attach.dataset["agentId"] = profile.agent_id;
      attach.textContent = "Attach to group";
      attach.disabled = !this.session.activeGroupId;
      if (attach.disabled) {
        attach.title = "join a group first";
      }
      card.append(nameEl, categoryEl, personaEl, attach);
      list.append(card);
    }
    this.el("square-status").textContent = `${shown.length} agents`;
  }

  private async attachFromSquare(agentId: string): Promise<void> {
    const gid = this.session.activeGroupId;
    if (!gid) {
      return;
    }
    try {
      await this.api.attachAgent(gid, agentId);
      this.el("square-status").textContent = `attached to ${gid}`;
    } catch (error) {
      this.el("square-status").textContent = describeError(error);
    }
  }

  // -- plugins -----------------------------------------------------------------

  private renderPluginFields(): void {
    const kind = this.el<HTMLSelectElement>("plugin-kind").value;
    const isAsr = kind === "asr";
    this.el<HTMLInputElement>("plugin-text").hidden = isAsr;
    this.el<HTMLSelectElement>("plugin-voice").hidden = isAsr;
    this.el<HTMLTextAreaElement>("plugin-audio-ref").hidden = !isAsr;
  }

  private async callPlugin(): Promise<void> {
    const kind = this.el<HTMLSelectElement>("plugin-kind").value;
    const errorBox = this.el("plugin-error");
    errorBox.hidden = true;
    errorBox.textContent = "";
    this.el("plugin-result").innerHTML = "";

    const input: {
      text?: string;
      audio_ref?: string;
      voice_style_id?: string;
      group_id?: string | null;
    } = { group_id: this.session.activeGroupId };
    if (kind === "asr") {
      input.audio_ref = this.el<HTMLTextAreaElement>("plugin-audio-ref").value;
    } else {
      input.text = this.el<HTMLInputElement>("plugin-text").value;
      const voice = this.el<HTMLSelectElement>("plugin-voice").value;
      if (voice) {
        input.voice_style_id = voice;
      }
    }
    try {
      const result = await this.api.callPlugin(kind, input);
      this.renderPluginResult(result);
    } catch (error) {
      errorBox.textContent = describeError(error);
      errorBox.hidden = false;
    }
  }

  private renderPluginResult(result: {
    kind: string;
    text: string | null;
    audio_ref: string | null;
    metadata: Record<string, unknown>;
  }): void {
    const container = this.el("plugin-result");
    container.innerHTML = "";

    const fields = this.doc.createElement("dl");
    fields.id = "plugin-fields";
    for (const [key, value] of [
      ["kind", result.kind],
      ["text", result.text],
      ["audio_ref", result.audio_ref],
    ] as const) {
      const dt = this.doc.createElement("dt");
      dt.textContent = key;
      const dd = this.doc.createElement("dd");
      dd.dataset["key"] = key;
      dd.textContent = value ?? "";
      fields.append(dt, dd);
    }

    const heading = this.doc.createElement("h3");
    heading.textContent = "metadata";
    const metadata = this.doc.createElement("dl");
    metadata.id = "plugin-metadata";
    for (const key of Object.keys(result.metadata).sort()) {
      const dt = this.doc.createElement("dt");
      dt.textContent = key;
      const dd = this.doc.createElement("dd");
      dd.dataset["key"] = key;
      dd.textContent = String(result.metadata[key]);
      metadata.append(dt, dd);
    }
    container.append(fields, heading, metadata);
  }
}

function describeError(error: unknown): string {
  if (error instanceof ApiError) {
    return `${error.code}: ${error.detail}`;
  }
  return error instanceof Error ? error.message : String(error);
}
