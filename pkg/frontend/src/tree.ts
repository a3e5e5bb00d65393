// Expandable specialization-tree browser backed by depth-1 queries.
// Display filtering (hide / small-font) comes from the server's
// filter-application endpoint; the client only applies the verdicts.

import { ApiClient, TreeNodeOut } from "./api.js";

export interface BrowserNode {
  label: string;
  linkKind: string | null;
  creator: string | null;
  display: string;
  expanded: boolean;
  children: BrowserNode[];
}

function toBrowserNode(node: TreeNodeOut): BrowserNode {
  return {
    label: node.label,
    linkKind: node.link_kind,
    creator: node.creator,
    display: node.display,
    expanded: false,
    children: [],
  };
}

export class TreeBrowser {
  root: BrowserNode | null = null;
  filter: string | null = null;

  constructor(private api: ApiClient) {}

  async open(rootLabel: string): Promise<BrowserNode> {
    this.root = toBrowserNode({
      label: rootLabel, link_kind: null, creator: null, display: "show", children: [],
    });
    await this.expand(this.root);
    return this.root;
  }

  // Expanding a node fetches exactly its depth-1 children.
  async expand(node: BrowserNode): Promise<void> {
    const response = await this.api.specializations(
      node.label, 1, this.filter ?? undefined);
    const fetched = response.tree?.children ?? [];
    node.children = fetched.map(toBrowserNode);
    node.expanded = true;
  }

  async setFilter(name: string | null): Promise<void> {
    this.filter = name;
    if (!name || !this.root) {
      if (this.root) this.visit(this.root, (n) => (n.display = "show"));
      return;
    }
    const labels: string[] = [];
    this.visit(this.root, (n) => labels.push(n.label));
    const verdicts = await this.api.filterApply(name, labels);
    const display = new Map(verdicts.map((v) => [v.object, v.display]));
    this.visit(this.root, (n) => (n.display = display.get(n.label) ?? "show"));
  }

  visit(node: BrowserNode, fn: (n: BrowserNode) => void): void {
    fn(node);
    for (const child of node.children) this.visit(child, fn);
  }
}

export function renderBrowser(node: BrowserNode, indent = 0, lines: string[] = []): string[] {
  const annotation = node.linkKind ? `  (${node.linkKind}, ${node.creator})` : "";
  const marker = node.display === "show" ? "" : ` [${node.display}]`;
  lines.push("  ".repeat(indent) + node.label + annotation + marker);
  for (const child of [...node.children].sort((a, b) => a.label.localeCompare(b.label))) {
    renderBrowser(child, indent + 1, lines);
  }
  return lines;
}
