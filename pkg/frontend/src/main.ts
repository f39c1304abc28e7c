import { ApiClient } from "./api.js";
import { App } from "./app.js";

// same-origin by default; ?api=http://host:port points elsewhere
const apiBase = new URLSearchParams(window.location.search).get("api") ?? "";
const root = document.getElementById("app");
if (!root) throw new Error("missing #app mount point");
void new App(root, new ApiClient(apiBase)).init();
