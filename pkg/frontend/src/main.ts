import { ViewerApp } from "./app.js";

const app = new ViewerApp({ root: document.body });
app.start().catch((err) => console.error(err));
