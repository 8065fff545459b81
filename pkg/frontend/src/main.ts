import { boot } from "./app.js";

boot(document).catch((error) => {
  const banner = document.getElementById("banner");
  if (banner) {
    banner.textContent = `API unreachable: ${error}`;
    banner.removeAttribute("hidden");
  }
});
