package demo;

public class Util {
    @Override
    public String toString() {
        return "Util";
    }

    public static int len(String s) {
        int n = 0;
        if (s == null) {
            return -1;
        }
        // count
        n = s.length();

        return n;
    }

    int sign(int x) {
        if (x > 0) return 1;
        else if (x < 0) return -1;
        return 0;
    }

    void broken() {
        int y = ;
    }
}
