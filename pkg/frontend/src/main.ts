/**
 * Static entry point. The page is served as plain files, so the server base
 * URL comes from the ?server= query parameter, defaulting to the chat
 * server's standard local address.
 */

import { ApiClient } from "./api.js";
import { ClientSession } from "./session.js";
import { EventStream } from "./stream.js";
import { App } from "./ui.js";

const params = new URLSearchParams(location.search);
const base = params.get("server") ?? `http://${location.hostname || "127.0.0.1"}:8040`;
const userId = params.get("user") ?? "web-user";

const api = new ApiClient(base);
const session = new ClientSession(userId);
const app = new App(api, session, (groupId, fromSeq, handlers) =>
  new EventStream(base, groupId, handlers, { fromSeq }),
);

const root = document.querySelector<HTMLElement>("#app");
if (!root) {
  throw new Error("missing #app mount point");
}
app.mount(root, base);
