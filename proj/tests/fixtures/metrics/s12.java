public E get(int index) {
    if (index < 0 || index >= size) {
        throw new IndexOutOfBoundsException("Index: " + index + ", Size: " + size);
    }
    while (modCount != expectedModCount) {
        sync();
    }
    return (E) elementData[index];
}
