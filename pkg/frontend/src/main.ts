import { App } from "./app";
import { RpcClient } from "./rpc";
import "./styles.css";

// Served by the registry at /ui, so the RPC endpoint is same-origin. A
// different origin (e.g. the vite dev server) can point elsewhere with
// ?registry=http://host:port.
const override = new URLSearchParams(window.location.search).get("registry");
const app = new App(document.getElementById("app")!, new RpcClient(override ?? ""));
app.start();
