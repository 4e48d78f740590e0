import { ApiClient } from "./api.js";
import { App, DEFAULT_POLL_INTERVAL_MS } from "./app.js";

function param(name: string, fallback: string): string {
  const params = new URLSearchParams(window.location.search);
  return params.get(name) ?? window.localStorage.getItem(`botender.${name}`) ?? fallback;
}

const baseUrl = param("api", "http://127.0.0.1:8400");
const token = param("token", "");
const serverId = param("server", "s1");
const poll = Number(param("poll", String(DEFAULT_POLL_INTERVAL_MS)));

window.localStorage.setItem("botender.api", baseUrl);
if (token) window.localStorage.setItem("botender.token", token);
window.localStorage.setItem("botender.server", serverId);

const root = document.querySelector<HTMLElement>("#app");
if (!root) throw new Error("missing #app mount point");

if (!token) {
  root.innerHTML = `<p>Pass ?token=&lt;your token&gt; (and optionally ?api=, ?server=) to sign in.</p>`;
} else {
  const app = new App({
    root,
    api: new ApiClient(baseUrl, token),
    serverId,
    pollIntervalMs: poll,
  });
  void app.start();
}
