/** Browser entry point: mount the tutor against the gateway from
 * `inq serve --http <port>`. The engine origin defaults to the page's
 * own (put the gateway behind a proxy, or serve this page from it); a
 * `?engine=http://127.0.0.1:8765` query parameter points elsewhere —
 * the gateway answers CORS preflights, so cross-origin is fine.
 */
import { TutorApp } from "./app.js";
import { httpTransport } from "./rpc.js";

const root = document.getElementById("app");
if (root) {
  const engine = new URLSearchParams(window.location.search).get("engine") ?? "";
  new TutorApp(root, httpTransport(engine));
}
