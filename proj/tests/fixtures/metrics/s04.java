public void clear() {
    this.items.clear();
    this.size = 0;
}
