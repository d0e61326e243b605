// Keyboard shortcuts for the review flow. Keys are ignored while the focus
// is inside an input/select/textarea so typing an annotator id never fires
// a label.

export type ShortcutActions = {
  chooseBot: () => void;
  chooseHuman: () => void;
  chooseCategory: (index: number) => void;
  submit: () => void;
  next: () => void;
  prev: () => void;
  back: () => void;
};

type KeyEventLike = {
  key: string;
  target?: unknown;
  preventDefault(): void;
};

function insideFormField(target: unknown): boolean {
  const tag =
    target && typeof target === "object" && "tagName" in target
      ? String((target as { tagName: unknown }).tagName).toUpperCase()
      : "";
  return tag === "INPUT" || tag === "TEXTAREA" || tag === "SELECT";
}

export function makeKeyHandler(actions: ShortcutActions) {
  return (event: KeyEventLike): void => {
    if (insideFormField(event.target)) return;
    switch (event.key) {
      case "b":
        event.preventDefault();
        actions.chooseBot();
        break;
      case "h":
        event.preventDefault();
        actions.chooseHuman();
        break;
      case "1":
      case "2":
      case "3":
      case "4":
        event.preventDefault();
        actions.chooseCategory(Number(event.key) - 1);
        break;
      case "Enter":
        event.preventDefault();
        actions.submit();
        break;
      case "j":
        event.preventDefault();
        actions.next();
        break;
      case "k":
        event.preventDefault();
        actions.prev();
        break;
      case "Escape":
        event.preventDefault();
        actions.back();
        break;
      default:
        break;
    }
  };
}
