/** Command-box history with arrow-key recall, newest last. */

export class CommandHistory {
  private entries: string[] = [];
  private cursor = -1; // -1 means "past the end", editing a fresh line

  push(text: string): void {
    if (text.trim().length === 0) return;
    if (this.entries[this.entries.length - 1] !== text) {
      this.entries.push(text);
    }
    this.cursor = -1;
  }

  /** Up-arrow: walk backward through history; sticks at the oldest entry. */
  up(): string | undefined {
    if (this.entries.length === 0) return undefined;
    if (this.cursor === -1) {
      this.cursor = this.entries.length - 1;
    } else if (this.cursor > 0) {
      this.cursor -= 1;
    }
    return this.entries[this.cursor];
  }

  /** Down-arrow: walk forward; past the newest entry returns "". */
  down(): string {
    if (this.cursor === -1) return "";
    this.cursor += 1;
    if (this.cursor >= this.entries.length) {
      this.cursor = -1;
      return "";
    }
    return this.entries[this.cursor];
  }

  get length(): number {
    return this.entries.length;
  }

  all(): string[] {
    return [...this.entries];
  }
}
