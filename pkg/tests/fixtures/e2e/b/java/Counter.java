package demo;

public class Counter {
    private int value;

    public void add(int delta) {
        value += Math.max(delta, 0);
    }

    public int get() {
        return value;
    }
}
