import { ApiClient } from "./api.js";
import { PracticeView } from "./practice.js";
import { TeacherView } from "./teacher.js";

function activate(tab: string): void {
  for (const button of document.querySelectorAll<HTMLButtonElement>("[data-tab]")) {
    button.classList.toggle("active", button.dataset.tab === tab);
  }
  for (const panel of document.querySelectorAll<HTMLElement>("[data-panel]")) {
    panel.hidden = panel.dataset.panel !== tab;
  }
}

export function bootstrap(root: Document = document): void {
  const client = new ApiClient();
  const practiceRoot = root.querySelector<HTMLElement>('[data-panel="practice"]');
  const teacherRoot = root.querySelector<HTMLElement>('[data-panel="teacher"]');
  if (!practiceRoot || !teacherRoot) return;
  const practice = new PracticeView(practiceRoot, client);
  new TeacherView(teacherRoot, client);
  for (const button of root.querySelectorAll<HTMLButtonElement>("[data-tab]")) {
    button.addEventListener("click", () => activate(button.dataset.tab ?? "practice"));
  }
  activate("practice");
  void practice.load();
}

bootstrap();
