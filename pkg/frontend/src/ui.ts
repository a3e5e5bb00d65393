// Browser entry: wires the compose, conflict, hierarchy and rating views.
// Served statically next to the API (same origin).

import { ApiClient, ConflictOut } from "./api.js";
import { ComposeSession, renderConflict, renderOutcome } from "./session.js";
import { BrowserNode, TreeBrowser, renderBrowser } from "./tree.js";

const api = new ApiClient("", "u1");
let session = new ComposeSession(api);
const browser = new TreeBrowser(api);

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, attrs: Record<string, string> = {}, text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text) node.textContent = text;
  return node;
}

function creatorBadge(label: string): HTMLElement {
  const creator = label.includes("#") ? label.split("#")[0] : "informal";
  const badge = el("span", { class: `badge badge-${creator}` }, creator);
  badge.style.marginRight = "0.4em";
  return badge;
}

async function install(): Promise<void> {
  const app = document.querySelector("#app");
  if (!app) return;

  // acting user
  const userRow = el("div", { class: "row" });
  userRow.appendChild(el("label", {}, "acting as "));
  const userSelect = el("select", { id: "user" });
  userRow.appendChild(userSelect);
  app.appendChild(userRow);
  for (const user of await api.users()) {
    const option = el("option", { value: user.name }, `${user.name} (${user.kind})`);
    userSelect.appendChild(option);
  }
  userSelect.onchange = () => {
    api.user = userSelect.value;
    session = new ComposeSession(api);
  };

  // compose view
  const compose = el("div", { class: "compose" });
  const draft = el("textarea", { id: "draft", rows: "3", cols: "80" });
  draft.placeholder = "u2#`75% of wn#bird can be agent of a flight´;";
  const conflictBox = el("div", { id: "conflicts" });
  const outcomeBox = el("pre", { id: "outcome" });
  const submit = el("button", { id: "submit" }, "Assert");
  compose.append(draft, el("div", {}), submit, conflictBox, outcomeBox);
  app.appendChild(compose);

  let debounce: number | undefined;
  draft.oninput = () => {
    window.clearTimeout(debounce);
    debounce = window.setTimeout(async () => {
      if (!draft.value.trim()) return;
      try {
        const check = await session.checkDraft(draft.value);
        showConflicts(check.conflicts, conflictBox, draft);
      } catch {
        conflictBox.textContent = "";
      }
    }, 400);
  };

  submit.onclick = async () => {
    try {
      const response = await session.submit(draft.value);
      outcomeBox.textContent = response.outcome
        ? renderOutcome(response.outcome).join("\n")
        : (response.tree_text ?? response.results.join("\n"));
      showConflicts(session.state.conflicts, conflictBox, draft);
      await refreshTree();
    } catch (error) {
      outcomeBox.textContent = String(error);
    }
  };

  // hierarchy browser
  const treeControls = el("div", { class: "row" });
  const rootInput = el("input", { id: "root", value: "pm#thing" });
  const openButton = el("button", {}, "Browse");
  const filterInput = el("input", { id: "filter", placeholder: "filter name" });
  treeControls.append(rootInput, openButton, filterInput);
  const treeBox = el("div", { id: "tree" });
  app.append(treeControls, treeBox);

  async function refreshTree(): Promise<void> {
    if (!browser.root) return;
    await browser.open(browser.root.label);
    drawTree();
  }

  function drawTree(): void {
    treeBox.textContent = "";
    if (!browser.root) return;
    const draw = (node: BrowserNode, indent: number) => {
      const row = el("div", { class: "tree-row" });
      row.style.marginLeft = `${indent}em`;
      if (node.display === "hide") row.style.display = "none";
      if (node.display === "small-font") row.style.fontSize = "70%";
      row.appendChild(creatorBadge(node.label));
      const label = el("span", {},
        node.linkKind ? `${node.label}  (${node.linkKind}, ${node.creator})` : node.label);
      row.appendChild(label);
      if (!node.expanded) {
        const expand = el("button", {}, "+");
        expand.onclick = async () => {
          await browser.expand(node);
          drawTree();
        };
        row.appendChild(expand);
      }
      const rate = el("button", { title: "rate 0..1" }, "rate");
      rate.onclick = async () => {
        const value = window.prompt(`rating for ${node.label} (0..1)`, "0.5");
        if (value !== null) await api.putRating(node.label, Number(value));
      };
      row.appendChild(rate);
      treeBox.appendChild(row);
      for (const child of node.children) draw(child, indent + 1);
    };
    draw(browser.root, 0);
  }

  openButton.onclick = async () => {
    await browser.open(rootInput.value.trim());
    if (filterInput.value.trim()) await browser.setFilter(filterInput.value.trim());
    drawTree();
  };
  filterInput.onchange = async () => {
    await browser.setFilter(filterInput.value.trim() || null);
    drawTree();
  };
}

function showConflicts(conflicts: ConflictOut[], box: HTMLElement,
                       draft: HTMLTextAreaElement): void {
  box.textContent = "";
  for (const conflict of conflicts) {
    const row = el("div", { class: "conflict" });
    row.appendChild(el("span", {}, renderConflict(conflict)));
    if (conflict.corrective_template) {
      const fix = el("button", {}, "correct via " + conflict.kind);
      fix.onclick = () => {
        draft.value = conflict.corrective_template as string;
      };
      row.appendChild(fix);
    }
    box.appendChild(row);
  }
}

install();
