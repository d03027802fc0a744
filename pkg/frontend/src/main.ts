import { ExperimentClient } from "./api.js";
import { ParticipantApp } from "./app.js";

const root = document.getElementById("app");
if (!root) {
  throw new Error("missing #app mount point");
}
const baseUrl = document.body.dataset.apiBase ?? "";
const app = new ParticipantApp(root, new ExperimentClient(baseUrl), window.localStorage);
void app.start();
